#pragma once

// =============================================================================
// Baseline scheduler: SoC-weighted ranked state lists refreshed by a slow loop.
// =============================================================================

#include "mmspc/control.hpp"
#include "mmspc/topology.hpp"

#include <vector>

namespace mmspc {

/// Ranking cost of a state. With u_i the LUT share of module i (discharge load),
/// cost = sum_i -u_i (soc_i - soc_mean) + u_i^2, so low cost favours loading
/// modules above the mean SoC and even sharing.
[[nodiscard]] double reference_cost(const StringState& state, const std::vector<double>& socs,
                                    const ObserverLUT& lut);

struct OptimizedStateList {
    int n = 0;
    std::vector<std::vector<StringState>> ranked;  ///< index level + n, best first
    double epoch = 0.0;
    double update_period = 0.1;

    [[nodiscard]] const std::vector<StringState>& for_level(int level) const;
    bool operator==(const OptimizedStateList&) const = default;
};

/// Ranks every level's states at time t (ties by canonical order).
[[nodiscard]] OptimizedStateList build_state_list(int n, const std::vector<double>& socs,
                                                  const ObserverLUT& lut, double t,
                                                  double update_period);

/// Re-ranks when t - epoch >= update_period; otherwise returns the list unchanged.
[[nodiscard]] OptimizedStateList slow_loop_rebuild(const std::vector<double>& socs, double t,
                                                   const OptimizedStateList& list,
                                                   const ObserverLUT& lut);

[[nodiscard]] StringState reference_select(const OptimizedStateList& list, int level);

struct ReferenceSettings {
    double update_period = 0.1;
    double soc_delay = 0.0;  ///< age of the SoC snapshot used at each rebuild
};

class ReferenceScheduler {
public:
    ReferenceScheduler(int n, const ReferenceSettings& settings, const std::vector<double>& socs);

    const StringState& step(double t, int level, const std::vector<double>& socs);

    [[nodiscard]] const OptimizedStateList& list() const { return list_; }
    [[nodiscard]] const StringState& state() const { return state_; }

private:
    int n_;
    ObserverLUT lut_;
    DelayLine soc_delay_;
    OptimizedStateList list_;
    StringState state_;
};

}  // namespace mmspc
