// Command-line front end: simulate, compare, sweep, spectrum, degrade, randles.

#include "mmspc/csv.hpp"
#include "mmspc/errors.hpp"
#include "mmspc/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
    std::string config;
    std::string out = ".";
    std::optional<std::string> method;
    std::optional<double> delay_ms;
    std::optional<double> duration_s;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "scenario config file (key = value)");
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--method", c.method, "proposed | reference | proposed-sensorless");
    cmd->add_option("--delay-ms", c.delay_ms,
                    "feedback delay of the proposed scheduler; update period for reference");
    cmd->add_option("--duration-s", c.duration_s, "simulated time");
}

mmspc::ScenarioConfig resolve(const Common& c, bool delay_is_reference_period) {
    auto cfg = c.config.empty() ? mmspc::ScenarioConfig{} : mmspc::load_config(c.config);
    if (c.method) {
        cfg.method = mmspc::parse_method(*c.method);
    }
    if (c.duration_s) {
        cfg.duration = *c.duration_s;
    }
    if (c.delay_ms) {
        if (*c.delay_ms < 0.0) {
            throw mmspc::ConfigError("--delay-ms must be nonnegative");
        }
        const double d = *c.delay_ms / 1000.0;
        if (delay_is_reference_period || cfg.method == mmspc::Method::Reference) {
            cfg.reference.update_period = d;
        } else {
            cfg.proposed.feedback_delay = d;
        }
    }
    cfg.validate();
    return cfg;
}

std::string out_path(const Common& c, const std::string& name) {
    std::filesystem::create_directories(c.out);
    return (std::filesystem::path(c.out) / name).string();
}

std::vector<double> module_signal(const Common& c, const mmspc::ScenarioConfig& cfg,
                                  const std::string& input, int module) {
    const int k = module > 0 ? module : static_cast<int>(cfg.target_module) + 1;
    if (!input.empty()) {
        return mmspc::read_csv_column(input, "i_b" + std::to_string(k));
    }
    if (k > cfg.n_modules) {
        throw mmspc::ConfigError("--module outside the string");
    }
    const auto trace = mmspc::run_scenario(cfg);
    mmspc::write_trace_csv(trace, out_path(c, "trace.csv"));
    return trace.module_current(static_cast<std::size_t>(k - 1));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Series-parallel battery string scheduling simulator"};
    app.require_subcommand(1);

    Common common;
    std::string input;
    int module = 0;

    auto* simulate = app.add_subcommand("simulate", "run one scenario and write its trace");
    auto* compare = app.add_subcommand("compare", "proposed vs reference on identical waveforms");
    auto* sweep = app.add_subcommand("sweep", "ageing metric over the modulation-index grid");
    auto* spectrum = app.add_subcommand("spectrum", "amplitude spectrum of a module current");
    auto* degrade = app.add_subcommand("degrade", "filtered ripple ratios of a module current");
    auto* randles = app.add_subcommand("randles", "Randles impedance over frequency");
    for (auto* cmd : {simulate, compare, sweep, spectrum, degrade, randles}) {
        add_common(cmd, common);
    }
    for (auto* cmd : {spectrum, degrade}) {
        cmd->add_option("--input", input, "trace CSV to analyse instead of simulating");
        cmd->add_option("--module", module, "module number (1-based), default target module");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (simulate->parsed()) {
            const auto cfg = resolve(common, false);
            const auto trace = mmspc::run_scenario(cfg);
            mmspc::write_trace_csv(trace, out_path(common, "trace.csv"));
            if (!trace.j_star.empty()) {
                mmspc::write_control_csv(trace, out_path(common, "control.csv"));
            }
            const auto s = mmspc::summarize(trace, cfg);
            mmspc::write_spectrum_csv(s.spectrum, out_path(common, "spectrum.csv"));
            mmspc::write_ageing_csv(s.ageing, out_path(common, "ageing.csv"));
            std::cout << "simulate: " << trace.records.size() << " ticks, module " << s.module + 1
                      << " rms/avg " << mmspc::format_double(s.rms_avg) << "\n";
        } else if (compare->parsed()) {
            const auto cfg = resolve(common, true);
            const auto r = mmspc::compare_methods(cfg);
            mmspc::write_trace_csv(r.proposed, out_path(common, "trace_proposed.csv"));
            mmspc::write_trace_csv(r.reference, out_path(common, "trace_reference.csv"));
            mmspc::write_spectrum_csv(r.proposed_summary.spectrum,
                                      out_path(common, "spectrum_proposed.csv"));
            mmspc::write_spectrum_csv(r.reference_summary.spectrum,
                                      out_path(common, "spectrum_reference.csv"));
            mmspc::write_ageing_csv(r.proposed_summary.ageing, out_path(common, "ageing_proposed.csv"));
            mmspc::write_ageing_csv(r.reference_summary.ageing,
                                    out_path(common, "ageing_reference.csv"));
            mmspc::write_summary_csv(r, out_path(common, "summary.csv"));
            std::cout << "compare: rms/avg proposed " << mmspc::format_double(r.proposed_summary.rms_avg)
                      << ", reference " << mmspc::format_double(r.reference_summary.rms_avg) << "\n";
        } else if (sweep->parsed()) {
            const auto cfg = resolve(common, false);
            const auto r = mmspc::sweep_modulation(cfg, cfg.sweep_m);
            mmspc::write_sweep_csv(r, out_path(common, "sweep.csv"));
            mmspc::write_sweep_switching_csv(r, out_path(common, "sweep_switching.csv"));
            std::cout << "sweep: " << r.rows.size() << " rows\n";
        } else if (spectrum->parsed()) {
            const auto cfg = resolve(common, false);
            const auto x = module_signal(common, cfg, input, module);
            mmspc::write_spectrum_csv(mmspc::amplitude_spectrum(x, cfg.waveform.f_rate),
                                      out_path(common, "spectrum.csv"));
        } else if (degrade->parsed()) {
            const auto cfg = resolve(common, false);
            const auto x = module_signal(common, cfg, input, module);
            mmspc::write_ageing_csv(mmspc::ageing_metric(x, cfg.cutoffs, cfg.waveform.f_rate),
                                    out_path(common, "ageing.csv"));
        } else if (randles->parsed()) {
            const auto cfg = resolve(common, false);
            std::vector<double> f;
            std::vector<std::complex<double>> z;
            const double lo = std::log10(cfg.randles_f_min);
            const double hi = std::log10(cfg.randles_f_max);
            for (int i = 0; i < cfg.randles_points; ++i) {
                const double fi = std::pow(10.0, lo + (hi - lo) * i / (cfg.randles_points - 1));
                f.push_back(fi);
                z.push_back(mmspc::randles_impedance(fi, cfg.randles));
            }
            mmspc::write_randles_csv(f, z, out_path(common, "randles.csv"));
        }
    } catch (const mmspc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
