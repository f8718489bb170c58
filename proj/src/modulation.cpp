#include "mmspc/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmspc {

void WaveformSpec::validate() const {
    if (!(f_out > 0.0) || !(f_rate >= 100.0 * f_out)) {
        throw std::invalid_argument("f_rate must be at least 100 * f_out and f_out positive");
    }
    if (!(m >= 0.0 && m <= 1.0)) {
        throw std::invalid_argument("modulation index must lie in [0, 1]");
    }
    if (!(i_pk >= 0.0)) {
        throw std::invalid_argument("i_pk must be nonnegative");
    }
}

double reference_level(double t, const WaveformSpec& spec, int n) {
    return n * spec.m * std::sin(2.0 * std::numbers::pi * spec.f_out * t);
}

double phase_current(double t, const WaveformSpec& spec) {
    return spec.i_pk * std::sin(2.0 * std::numbers::pi * spec.f_out * t - spec.phi);
}

SigmaDeltaOutput sigma_delta_step(double ref, int prev_level, double acc, int n) {
    const double d = acc + ref - prev_level;
    int level = prev_level;
    if (d >= 0.5) {
        level = prev_level + 1;
    } else if (d <= -0.5) {
        level = prev_level - 1;
    }
    level = std::clamp(level, -n, n);
    return {level, acc + ref - level};
}

}  // namespace mmspc
