#include "mmspc/reference_control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mmspc {

double reference_cost(const StringState& state, const std::vector<double>& socs,
                      const ObserverLUT& lut) {
    const auto& share = lut.at(state);
    if (socs.size() != share.size()) {
        throw std::invalid_argument("soc vector length differs from module count");
    }
    const double mean = std::accumulate(socs.begin(), socs.end(), 0.0) / static_cast<double>(socs.size());
    double c = 0.0;
    for (std::size_t i = 0; i < share.size(); ++i) {
        const double u = share[i];
        c += -u * (socs[i] - mean) + u * u;
    }
    return c;
}

const std::vector<StringState>& OptimizedStateList::for_level(int level) const {
    if (std::abs(level) > n) {
        throw std::out_of_range("level outside [-N, N]");
    }
    return ranked[static_cast<std::size_t>(level + n)];
}

OptimizedStateList build_state_list(int n, const std::vector<double>& socs,
                                    const ObserverLUT& lut, double t, double update_period) {
    if (!(update_period > 0.0)) {
        throw std::invalid_argument("update period must be positive");
    }
    OptimizedStateList list;
    list.n = n;
    list.epoch = t;
    list.update_period = update_period;
    list.ranked.resize(static_cast<std::size_t>(2 * n + 1));
    for (int level = -n; level <= n; ++level) {
        auto states = all_states_for_level(n, level);
        std::vector<std::pair<double, std::size_t>> keyed;
        keyed.reserve(states.size());
        for (std::size_t k = 0; k < states.size(); ++k) {
            keyed.emplace_back(reference_cost(states[k], socs, lut), k);
        }
        // states arrive in canonical order, so the index breaks cost ties.
        std::sort(keyed.begin(), keyed.end());
        auto& out = list.ranked[static_cast<std::size_t>(level + n)];
        out.reserve(states.size());
        for (const auto& [cost, k] : keyed) {
            out.push_back(states[k]);
        }
    }
    return list;
}

OptimizedStateList slow_loop_rebuild(const std::vector<double>& socs, double t,
                                     const OptimizedStateList& list, const ObserverLUT& lut) {
    if (t < list.epoch) {
        throw std::invalid_argument("rebuild time precedes list epoch");
    }
    // Tick times carry rounding; a period is complete within 1 ns.
    if (t - list.epoch < list.update_period - 1e-9) {
        return list;
    }
    return build_state_list(list.n, socs, lut, t, list.update_period);
}

StringState reference_select(const OptimizedStateList& list, int level) {
    return list.for_level(level).front();
}

ReferenceScheduler::ReferenceScheduler(int n, const ReferenceSettings& settings,
                                       const std::vector<double>& socs)
    : n_(n),
      lut_(build_ideal_lut(n)),
      soc_delay_(settings.soc_delay),
      list_(build_state_list(n, socs, lut_, 0.0, settings.update_period)),
      state_(bypassed_state(n)) {
    (void)soc_delay_.push(0.0, socs);
}

const StringState& ReferenceScheduler::step(double t, int level, const std::vector<double>& socs) {
    const auto seen = soc_delay_.push(t, socs);
    list_ = slow_loop_rebuild(seen, t, list_, lut_);
    state_ = reference_select(list_, level);
    return state_;
}

}  // namespace mmspc
