#include "mmspc/harness.hpp"
#include "mmspc/errors.hpp"
#include "mmspc/reference_control.hpp"

#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <random>

namespace mmspc {

std::vector<double> Trace::module_current(std::size_t module) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.i_b.at(module));
    }
    return out;
}

std::vector<double> Trace::module_soc(std::size_t module) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.soc.at(module));
    }
    return out;
}

std::vector<std::size_t> Trace::states() const {
    std::vector<std::size_t> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.state);
    }
    return out;
}

std::vector<double> Trace::levels() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.level);
    }
    return out;
}

namespace {

/// Uniform in [-1, 1) from the top 53 bits, independent of library distributions.
double unit_jitter(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

std::vector<BatteryModule> initial_modules(const ScenarioConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    const auto n = static_cast<std::size_t>(cfg.n_modules);
    std::vector<BatteryModule> modules;
    modules.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double soc = cfg.initial_soc.empty() ? 0.5 : cfg.initial_soc[i];
        if (cfg.soc_jitter > 0.0) {
            soc += cfg.soc_jitter * unit_jitter(rng);
        }
        double r_b = cfg.r_b;
        if (cfg.r_jitter > 0.0) {
            r_b *= 1.0 + cfg.r_jitter * unit_jitter(rng);
        }
        modules.push_back(make_module(soc, cfg.capacity_ah, r_b, cfg.ocv));
    }
    return modules;
}

InterconnectResistances initial_interconnect(const ScenarioConfig& cfg) {
    auto res = InterconnectResistances::uniform(cfg.n_modules, cfg.r_sh, cfg.r_sl);
    if (cfg.r_jitter > 0.0) {
        // Separate stream so module jitter does not shift when n changes.
        std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        for (std::size_t j = 0; j < res.r_sh.size(); ++j) {
            res.r_sh[j] *= 1.0 + cfg.r_jitter * unit_jitter(rng);
            res.r_sl[j] *= 1.0 + cfg.r_jitter * unit_jitter(rng);
        }
    }
    return res;
}

// =============================================================================
// Tick loop
// =============================================================================

Trace run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_modules;
    const double f_s = cfg.waveform.f_rate;
    const double dt = 1.0 / f_s;
    const std::size_t ticks = cfg.tick_count();

    auto modules = initial_modules(cfg);
    const auto res = initial_interconnect(cfg);

    auto socs_of = [&modules]() {
        std::vector<double> s;
        s.reserve(modules.size());
        for (const auto& m : modules) {
            s.push_back(m.soc);
        }
        return s;
    };

    const bool reference = cfg.method == Method::Reference;
    std::optional<ProposedScheduler> proposed;
    std::optional<ReferenceScheduler> baseline;
    if (reference) {
        baseline.emplace(n, cfg.reference, socs_of());
    } else {
        auto settings = cfg.proposed;
        settings.sensorless = cfg.method == Method::ProposedSensorless;
        proposed.emplace(n, settings, res, bypassed_state(n));
    }

    Trace trace;
    trace.n = n;
    trace.f_s = f_s;
    trace.method = cfg.method;
    trace.records.reserve(ticks);
    if (!reference) {
        trace.j_star.reserve(ticks);
        trace.j_hat.reserve(ticks);
    }

    SigmaDeltaModulator modulator(n);
    const double shift_s = cfg.sensorless_phase_shift / (2.0 * std::numbers::pi * cfg.waveform.f_out);

    for (std::size_t k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) * dt;
        const int level = modulator.step(reference_level(t, cfg.waveform, n));
        const double i_l = phase_current(t, cfg.waveform);

        StringState state;
        if (reference) {
            state = baseline->step(t, level, socs_of());
        } else {
            SchedulerInput in;
            in.t = t;
            in.dt = dt;
            in.level = level;
            in.i_l = i_l;
            in.v_ref = reference_level(t - shift_s, cfg.waveform, n);
            state = proposed->step(in, modules);
            trace.j_star.push_back(proposed->j_star());
            trace.j_hat.push_back(proposed->j_hat());
        }

        const auto layout = decompose_groups(state);
        if (layout.level != level) {
            throw SchedulerDeadEnd("state " + to_string(state) + " has level " +
                                   std::to_string(layout.level) + ", modulator emitted " +
                                   std::to_string(level));
        }
        auto i_b = module_currents(layout, modules, res, i_l);
        for (std::size_t i = 0; i < modules.size(); ++i) {
            modules[i] = step_battery(modules[i], i_b[i], dt, cfg.ocv);
        }
        trace.records.push_back({t, level, i_l, state_index(state), std::move(i_b), socs_of()});
    }
    return trace;
}

// =============================================================================
// Experiments
// =============================================================================

MethodSummary summarize(const Trace& trace, const ScenarioConfig& cfg) {
    MethodSummary s;
    s.method = trace.method;
    s.module = cfg.target_module;
    const auto x = trace.module_current(cfg.target_module);
    const double f_s = trace.f_s;
    const double f2 = 2.0 * cfg.waveform.f_out;

    s.spectrum = amplitude_spectrum(x, f_s);
    s.ageing = ageing_metric(x, cfg.cutoffs, f_s);
    s.rms_avg = rms_avg_ratio(x);
    s.ripple = ripple_ratio(x);
    s.pattern = pattern_peak(x, f_s, cfg.waveform.f_out, cfg.lag_min, cfg.lag_max);
    s.raw_autocorr = autocorrelation_peak(x, f_s, cfg.lag_min, cfg.lag_max);

    const auto states = trace.states();
    s.switch_rate = module_switch_rate(states, trace.n, f_s, cfg.target_module);
    double sum = 0.0;
    for (int i = 0; i < trace.n; ++i) {
        sum += module_switch_rate(states, trace.n, f_s, static_cast<std::size_t>(i));
    }
    s.switch_rate_mean = sum / trace.n;

    s.low_freq_content = low_frequency_content(s.spectrum, f2);
    s.peak = largest_peak(s.spectrum, 0.0);
    s.sidebands = sideband_count(s.spectrum, 5.0, f2, 5.0, cfg.waveform.f_out);
    return s;
}

namespace {

ScenarioConfig with_method(ScenarioConfig cfg, Method m) {
    cfg.method = m;
    return cfg;
}

struct RunResult {
    Trace trace;
    MethodSummary summary;
};

RunResult run_and_summarize(const ScenarioConfig& cfg) {
    auto trace = run_scenario(cfg);
    auto summary = summarize(trace, cfg);
    return {std::move(trace), std::move(summary)};
}

}  // namespace

ComparisonReport compare_methods(const ScenarioConfig& cfg) {
    ComparisonReport r;
    r.proposed_cfg = with_method(cfg, Method::Proposed);
    r.reference_cfg = with_method(cfg, Method::Reference);
    auto fp = std::async(std::launch::async, run_and_summarize, r.proposed_cfg);
    auto fr = std::async(std::launch::async, run_and_summarize, r.reference_cfg);
    auto p = fp.get();
    auto q = fr.get();
    r.proposed = std::move(p.trace);
    r.proposed_summary = std::move(p.summary);
    r.reference = std::move(q.trace);
    r.reference_summary = std::move(q.summary);
    return r;
}

SweepReport sweep_modulation(const ScenarioConfig& cfg, const std::vector<double>& m_values) {
    const Method methods[] = {Method::Proposed, Method::Reference};
    std::vector<std::future<MethodSummary>> jobs;
    for (double m : m_values) {
        for (auto method : methods) {
            auto c = with_method(cfg, method);
            c.waveform.m = m;
            c.validate();
            jobs.push_back(std::async(std::launch::async, [c] {
                return summarize(run_scenario(c), c);
            }));
        }
    }
    SweepReport report;
    std::size_t job = 0;
    for (double m : m_values) {
        for (auto method : methods) {
            const auto s = jobs[job++].get();
            for (const auto& e : s.ageing.entries) {
                report.rows.push_back({m, method, e.fc_hz, e.ripple_ratio});
            }
            report.switching.push_back({m, method, s.switch_rate, s.switch_rate_mean,
                                        predicted_switch_rate(cfg.waveform.f_rate, cfg.n_modules, m),
                                        s.rms_avg});
        }
    }
    return report;
}

}  // namespace mmspc
