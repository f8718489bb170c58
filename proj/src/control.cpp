#include "mmspc/control.hpp"
#include "mmspc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mmspc {

// =============================================================================
// Observer
// =============================================================================

const std::vector<double>& ObserverLUT::at(const StringState& state) const {
    if (static_cast<int>(state.size()) != n) {
        throw std::out_of_range("no LUT entry for a " + std::to_string(state.size()) +
                                "-module state (LUT built for " + std::to_string(n) + ")");
    }
    return shares.at(state_index(state));
}

namespace {

ObserverLUT lut_skeleton(int n) {
    ObserverLUT lut;
    lut.n = n;
    const std::size_t count = state_count(n);
    lut.shares.resize(count);
    lut.polarity.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto layout = decompose_groups(state_from_index(k, n));
        auto& pol = lut.polarity[k];
        pol.assign(static_cast<std::size_t>(n), 0);
        for (const auto& g : layout.groups) {
            for (std::size_t i = g.first; i <= g.last; ++i) {
                pol[i] = g.polarity;
            }
        }
    }
    return lut;
}

}  // namespace

ObserverLUT build_ideal_lut(int n) {
    auto lut = lut_skeleton(n);
    for (std::size_t k = 0; k < lut.shares.size(); ++k) {
        lut.shares[k] = ideal_share(decompose_groups(state_from_index(k, n)));
    }
    return lut;
}

ObserverLUT build_solved_lut(int n, const std::vector<BatteryModule>& modules,
                             const InterconnectResistances& res, double i_ref) {
    if (!(i_ref > 0.0)) {
        throw std::invalid_argument("LUT reference current must be positive");
    }
    auto lut = lut_skeleton(n);
    for (std::size_t k = 0; k < lut.shares.size(); ++k) {
        const auto layout = decompose_groups(state_from_index(k, n));
        auto& s = lut.shares[k];
        s.assign(static_cast<std::size_t>(n), 0.0);
        for (const auto& g : layout.groups) {
            if (g.polarity == 0) {
                continue;
            }
            if (g.size() == 1) {
                s[g.first] = 1.0;
                continue;
            }
            const auto x =
                solve_distribution(assemble_system(g.first, g.size(), modules, res, i_ref));
            for (std::size_t j = 0; j < x.size(); ++j) {
                s[g.first + j] = x[j] / i_ref;
            }
        }
    }
    return lut;
}

std::vector<double> observer_estimate(const StringState& state, const ObserverLUT& lut,
                                      double phase_signal) {
    auto out = lut.at(state);
    for (auto& v : out) {
        v *= phase_signal;
    }
    return out;
}

std::vector<double> battery_frame_load(const StringState& state, const ObserverLUT& lut,
                                       double phase_signal) {
    auto out = observer_estimate(state, lut, phase_signal);
    const auto& pol = lut.polarity.at(state_index(state));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= pol[i];
    }
    return out;
}

// =============================================================================
// Controller
// =============================================================================

ControllerState ControllerState::make(int n, double kp, double ki, double limit, bool sensorless) {
    ControllerState cs;
    cs.integral.assign(static_cast<std::size_t>(n), 0.0);
    cs.kp = sensorless ? 0.0 : kp;
    cs.ki = ki;
    cs.limit = limit;
    cs.sensorless = sensorless;
    return cs;
}

ControllerOutput controller_step(const std::vector<double>& demand,
                                 const std::vector<double>& feedback, const ControllerState& cs,
                                 double dt) {
    if (dt <= 0.0) {
        throw std::invalid_argument("dt must be positive");
    }
    if (demand.size() != feedback.size() || demand.size() != cs.integral.size()) {
        throw std::invalid_argument("controller vector length mismatch");
    }
    ControllerOutput out{std::vector<double>(demand.size()), cs};
    const double kp = cs.sensorless ? 0.0 : cs.kp;
    const double bound = cs.ki > 0.0 ? cs.limit / cs.ki : 0.0;
    for (std::size_t i = 0; i < demand.size(); ++i) {
        const double e = demand[i] - feedback[i];
        double integ = cs.integral[i] + e * dt;
        if (cs.ki > 0.0) {
            integ = std::clamp(integ, -bound, bound);
        }
        out.state.integral[i] = integ;
        out.j_star[i] = kp * e + cs.ki * integ;
    }
    return out;
}

std::vector<double> demand_generator(const std::vector<double>& socs, double mean_utilization,
                                     DemandMode mode, double beta) {
    const std::size_t n = socs.size();
    std::vector<double> d(n, mean_utilization);
    if (mode == DemandMode::EqualShare || n == 0) {
        return d;
    }
    const double soc_mean = std::accumulate(socs.begin(), socs.end(), 0.0) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = mean_utilization * (1.0 + beta * (socs[i] - soc_mean));
    }
    const double got = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    if (got != 0.0) {
        const double k = mean_utilization / got;
        for (auto& v : d) {
            v *= k;
        }
    }
    return d;
}

double state_cost(const std::vector<double>& j_star, const std::vector<double>& j_m) {
    if (j_star.size() != j_m.size()) {
        throw std::invalid_argument("state_cost length mismatch");
    }
    double c = 0.0;
    for (std::size_t i = 0; i < j_star.size(); ++i) {
        const double d = j_star[i] - j_m[i];
        c += d * d;
    }
    return c;
}

namespace {

double load_cost(const std::vector<double>& j_star, const std::vector<double>& share,
                 const std::vector<int>& pol, double phase_signal) {
    double c = 0.0;
    for (std::size_t i = 0; i < j_star.size(); ++i) {
        const double d = j_star[i] - pol[i] * share[i] * phase_signal;
        c += d * d;
    }
    return c;
}

/// Shared argmin over canonical indices; `toggles[k]` is the distance of candidate k.
std::size_t argmin_candidate(const std::vector<std::size_t>& idx, const std::vector<int>& toggles,
                             const std::vector<double>& j_star, const ObserverLUT& lut,
                             double phase_signal) {
    if (idx.empty()) {
        throw std::invalid_argument("select_state called with no candidates");
    }
    double scale = 0.0;
    for (double v : j_star) {
        scale += v * v;
    }
    scale += phase_signal * phase_signal * static_cast<double>(j_star.size());
    const double tol = 1e-12 * std::max(scale, 1e-300);

    std::size_t best = 0;
    double best_cost = load_cost(j_star, lut.shares[idx[0]], lut.polarity[idx[0]], phase_signal);
    for (std::size_t k = 1; k < idx.size(); ++k) {
        const double c = load_cost(j_star, lut.shares[idx[k]], lut.polarity[idx[k]], phase_signal);
        if (c < best_cost - tol) {
            best = k;
            best_cost = c;
        } else if (c <= best_cost + tol) {
            const bool fewer = toggles[k] < toggles[best];
            const bool same_earlier = toggles[k] == toggles[best] && idx[k] < idx[best];
            if (fewer || same_earlier) {
                best = k;
                best_cost = std::min(best_cost, c);
            }
        }
    }
    return best;
}

}  // namespace

StringState select_state(const std::vector<StringState>& candidates, const StringState& current,
                         const std::vector<double>& j_star, const ObserverLUT& lut,
                         double phase_signal) {
    if (candidates.empty()) {
        throw std::invalid_argument("select_state called with no candidates");
    }
    std::vector<std::size_t> idx;
    std::vector<int> toggles;
    for (const auto& c : candidates) {
        (void)lut.at(c);
        idx.push_back(state_index(c));
        toggles.push_back(toggle_count(c, current));
    }
    return candidates[argmin_candidate(idx, toggles, j_star, lut, phase_signal)];
}

// =============================================================================
// Delay line
// =============================================================================

std::vector<double> DelayLine::push(double t, std::vector<double> sample) {
    if (!buffer_.empty() && t < buffer_.back().first) {
        throw std::invalid_argument("delay line time went backwards");
    }
    if (delay_ <= 0.0) {
        return sample;
    }
    buffer_.emplace_back(t, std::move(sample));
    // Tick times accumulate rounding; treat samples within 1 ns as aligned.
    const double cutoff = t - delay_ + 1e-9;
    while (buffer_.size() > 1 && buffer_[1].first <= cutoff) {
        buffer_.pop_front();
    }
    return buffer_.front().second;
}

std::vector<double> delay_feedback(DelayLine& dl, std::vector<double> sample, double t) {
    return dl.push(t, std::move(sample));
}

// =============================================================================
// Scheduler
// =============================================================================

ProposedScheduler::ProposedScheduler(int n, const ProposedSettings& settings,
                                     InterconnectResistances res, StringState initial)
    : n_(n),
      settings_(settings),
      res_(std::move(res)),
      lut_(build_ideal_lut(n)),
      controller_(ControllerState::make(
          n, settings.kp, settings.sensorless ? settings.ki_sensorless : settings.ki,
          settings.sensorless ? settings.anti_windup_sensorless : settings.anti_windup,
          settings.sensorless)),
      delay_(settings.feedback_delay),
      state_(std::move(initial)),
      j_star_(static_cast<std::size_t>(n), 0.0),
      j_hat_(static_cast<std::size_t>(n), 0.0) {
    if (static_cast<int>(state_.size()) != n) {
        throw std::invalid_argument("initial state length differs from module count");
    }
    if (settings.toggle_limit < 1) {
        throw std::invalid_argument("toggle_limit must be >= 1");
    }
}

const std::vector<std::size_t>& ProposedScheduler::candidates(std::size_t index, int delta) {
    const std::size_t key = index * 3 + static_cast<std::size_t>(delta + 1);
    auto it = transitions_.find(key);
    if (it != transitions_.end()) {
        return it->second;
    }
    std::vector<std::size_t> out;
    const auto from = state_from_index(index, n_);
    if (delta == 0 && !settings_.regroup) {
        out.push_back(index);
    } else {
        for (const auto& s : enumerate_transitions(from, delta, settings_.toggle_limit)) {
            out.push_back(state_index(s));
        }
    }
    return transitions_.emplace(key, std::move(out)).first->second;
}

void ProposedScheduler::maybe_refresh_lut(const std::vector<BatteryModule>& modules) {
    if (!settings_.adaptive_lut) {
        return;
    }
    bool stale = !lut_voltages_.has_value();
    if (!stale) {
        for (std::size_t i = 0; i < modules.size(); ++i) {
            if (std::abs(modules[i].v_b - (*lut_voltages_)[i]) > settings_.lut_threshold) {
                stale = true;
                break;
            }
        }
    }
    if (!stale) {
        return;
    }
    lut_ = build_solved_lut(n_, modules, res_, settings_.lut_current);
    lut_voltages_.emplace();
    for (const auto& m : modules) {
        lut_voltages_->push_back(m.v_b);
    }
}

const StringState& ProposedScheduler::step(const SchedulerInput& in,
                                           const std::vector<BatteryModule>& modules) {
    maybe_refresh_lut(modules);

    const auto feedback = delay_.push(in.t, j_hat_);
    const double mean_u =
        std::accumulate(feedback.begin(), feedback.end(), 0.0) / static_cast<double>(n_);
    std::vector<double> socs;
    socs.reserve(modules.size());
    for (const auto& m : modules) {
        socs.push_back(m.soc);
    }
    const auto demand = demand_generator(socs, mean_u, settings_.demand_mode, settings_.beta);
    auto ctrl = controller_step(demand, feedback, controller_, in.dt);
    controller_ = std::move(ctrl.state);
    j_star_ = std::move(ctrl.j_star);

    const int current_level = state_level(state_);
    const int delta = in.level - current_level;
    if (delta < -1 || delta > 1) {
        throw SchedulerDeadEnd("level step of " + std::to_string(delta) + " exceeds slew limit");
    }
    const std::size_t cur = state_index(state_);
    const auto& idx = candidates(cur, delta);
    if (idx.empty()) {
        throw SchedulerDeadEnd("no state reaches level " + std::to_string(in.level) + " from " +
                               to_string(state_));
    }

    const int sgn_level = (in.level > 0) - (in.level < 0);
    const double phase_signal = settings_.sensorless
                                    ? static_cast<double>((in.v_ref > 0.0) - (in.v_ref < 0.0))
                                    : std::abs(in.i_l) * sgn_level;

    std::vector<int> toggles;
    toggles.reserve(idx.size());
    for (auto k : idx) {
        int c = 0;
        std::size_t a = k;
        std::size_t b = cur;
        for (int i = 0; i < n_; ++i) {
            c += (a % 4) != (b % 4);
            a /= 4;
            b /= 4;
        }
        toggles.push_back(c);
    }
    const std::size_t chosen = idx[argmin_candidate(idx, toggles, j_star_, lut_, phase_signal)];
    state_ = state_from_index(chosen, n_);

    const auto& share = lut_.shares[chosen];
    const auto& pol = lut_.polarity[chosen];
    for (std::size_t i = 0; i < j_hat_.size(); ++i) {
        j_hat_[i] = pol[i] * share[i] * phase_signal;
    }
    return state_;
}

}  // namespace mmspc
