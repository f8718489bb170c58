#pragma once

// =============================================================================
// High-bandwidth module-current scheduler: observer LUT, per-module current
// controllers, least-squares state selection and feedback delay.
// =============================================================================

#include "mmspc/electrical.hpp"
#include "mmspc/topology.hpp"

#include <cstddef>
#include <deque>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mmspc {

// =============================================================================
// Observer
// =============================================================================

/// Expected per-module share of the group current for every state of n modules,
/// indexed by canonical state index. Polarities are kept alongside so estimates can
/// be mapped into the battery frame without re-decomposing.
struct ObserverLUT {
    int n = 0;
    std::vector<std::vector<double>> shares;
    std::vector<std::vector<int>> polarity;

    [[nodiscard]] const std::vector<double>& at(const StringState& state) const;
};

/// Constant LUT of ideal shares.
[[nodiscard]] ObserverLUT build_ideal_lut(int n);

/// LUT from the exact group solve at current i_ref with the given module voltages.
[[nodiscard]] ObserverLUT build_solved_lut(int n, const std::vector<BatteryModule>& modules,
                                           const InterconnectResistances& res, double i_ref);

/// LUT shares times phase_signal (string frame).
[[nodiscard]] std::vector<double> observer_estimate(const StringState& state,
                                                    const ObserverLUT& lut, double phase_signal);

/// Battery-frame load: the string-frame estimate multiplied by each module's
/// insertion polarity, so discharge is positive in both half-waves.
[[nodiscard]] std::vector<double> battery_frame_load(const StringState& state,
                                                     const ObserverLUT& lut, double phase_signal);

// =============================================================================
// Controller
// =============================================================================

struct ControllerState {
    std::vector<double> integral;
    double kp = 0.5;
    double ki = 50.0;
    double limit = 70.0;  ///< bound on |ki * integral|
    bool sensorless = false;

    [[nodiscard]] static ControllerState make(int n, double kp, double ki, double limit,
                                              bool sensorless);
};

struct ControllerOutput {
    std::vector<double> j_star;
    ControllerState state;
};

/// e = demand - feedback; J* = kp e + ki integral(e) with clamped integral.
/// Sensorless mode drops the proportional path.
[[nodiscard]] ControllerOutput controller_step(const std::vector<double>& demand,
                                               const std::vector<double>& feedback,
                                               const ControllerState& cs, double dt);

enum class DemandMode { EqualShare, SocProportional };

/// Equal-share: every entry equals mean_utilization. Soc-proportional: entries
/// mean_utilization * (1 + beta (soc_i - mean soc)), rescaled to keep the mean.
[[nodiscard]] std::vector<double> demand_generator(const std::vector<double>& socs,
                                                   double mean_utilization, DemandMode mode,
                                                   double beta = 2.0);

[[nodiscard]] double state_cost(const std::vector<double>& j_star, const std::vector<double>& j_m);

/// Candidate minimizing state_cost against the battery-frame load estimate. Ties go
/// to fewer toggles from `current`, then to the canonically smaller state.
[[nodiscard]] StringState select_state(const std::vector<StringState>& candidates,
                                       const StringState& current,
                                       const std::vector<double>& j_star,
                                       const ObserverLUT& lut, double phase_signal);

// =============================================================================
// Feedback delay
// =============================================================================

/// Returns the sample pushed at time t - delay; before that, holds the first sample.
class DelayLine {
public:
    explicit DelayLine(double delay) : delay_(delay) {}

    std::vector<double> push(double t, std::vector<double> sample);

    [[nodiscard]] double delay() const { return delay_; }

private:
    double delay_;
    std::deque<std::pair<double, std::vector<double>>> buffer_;
};

[[nodiscard]] std::vector<double> delay_feedback(DelayLine& dl, std::vector<double> sample,
                                                 double t);

// =============================================================================
// Scheduler
// =============================================================================

struct ProposedSettings {
    double kp = 0.5;
    double ki = 50.0;
    double ki_sensorless = 10.0;
    double anti_windup = 70.0;            ///< sensored bound [A]
    double anti_windup_sensorless = 2.0;  ///< sensorless bound [utilization]
    double feedback_delay = 0.0;
    int toggle_limit = 2;
    bool sensorless = false;
    bool regroup = true;                  ///< allow level-preserving regrouping moves
    DemandMode demand_mode = DemandMode::EqualShare;
    double beta = 2.0;
    bool adaptive_lut = false;
    double lut_threshold = 0.05;          ///< [V]
    double lut_current = 25.0;            ///< [A]
};

struct SchedulerInput {
    double t = 0.0;
    double dt = 0.0;
    int level = 0;
    double i_l = 0.0;
    double v_ref = 0.0;
};

class ProposedScheduler {
public:
    ProposedScheduler(int n, const ProposedSettings& settings, InterconnectResistances res,
                      StringState initial);

    /// Advance one tick and return the state realizing in.level.
    const StringState& step(const SchedulerInput& in, const std::vector<BatteryModule>& modules);

    [[nodiscard]] const StringState& state() const { return state_; }
    [[nodiscard]] const std::vector<double>& j_star() const { return j_star_; }
    [[nodiscard]] const std::vector<double>& j_hat() const { return j_hat_; }
    [[nodiscard]] const ObserverLUT& lut() const { return lut_; }

private:
    const std::vector<std::size_t>& candidates(std::size_t index, int delta);
    void maybe_refresh_lut(const std::vector<BatteryModule>& modules);

    int n_;
    ProposedSettings settings_;
    InterconnectResistances res_;
    ObserverLUT lut_;
    ControllerState controller_;
    DelayLine delay_;
    StringState state_;
    std::vector<double> j_star_;
    std::vector<double> j_hat_;
    std::optional<std::vector<double>> lut_voltages_;
    std::unordered_map<std::size_t, std::vector<std::size_t>> transitions_;
};

}  // namespace mmspc
