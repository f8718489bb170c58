#pragma once

// =============================================================================
// Scenario configuration: flat "section.key = value" text, unknown keys rejected.
// =============================================================================

#include "mmspc/analysis.hpp"
#include "mmspc/control.hpp"
#include "mmspc/electrical.hpp"
#include "mmspc/modulation.hpp"
#include "mmspc/reference_control.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mmspc {

enum class Method { Proposed, Reference, ProposedSensorless };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] Method parse_method(std::string_view text);
[[nodiscard]] std::string to_string(DemandMode m);

struct ScenarioConfig {
    int n_modules = 5;
    WaveformSpec waveform;
    Method method = Method::Proposed;
    double duration = 2.0;
    std::uint64_t seed = 0;
    std::size_t target_module = 4;  ///< 0-based; the terminal-adjacent module by default

    ProposedSettings proposed;
    double sensorless_phase_shift = 0.0;  ///< [rad], shifts the sign reference
    ReferenceSettings reference;

    double capacity_ah = 6.2;
    double r_b = 26.5e-3;  ///< cell stack plus switch path
    OcvMap ocv;
    std::vector<double> initial_soc;  ///< empty: 0.5 for every module
    double soc_jitter = 0.0;          ///< uniform +- amplitude added to initial SoC
    double r_sh = 0.75e-3;
    double r_sl = 0.75e-3;
    double r_jitter = 0.0;            ///< uniform +- relative spread on every resistance

    std::vector<double> cutoffs{5.0, 50.0, 100.0};
    double lag_min = 0.02;
    double lag_max = 0.5;
    std::vector<double> sweep_m{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

    RandlesParams randles;
    double randles_f_min = 0.01;
    double randles_f_max = 1.0e4;
    int randles_points = 121;

    /// Throws ConfigError on any inconsistency.
    void validate() const;

    [[nodiscard]] std::size_t tick_count() const;
    [[nodiscard]] std::size_t period_ticks() const;
};

/// Parses "key = value" lines; '#' starts a comment. Later keys override earlier ones.
[[nodiscard]] ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {});
[[nodiscard]] ScenarioConfig load_config(const std::string& path);

/// Every accepted key, sorted.
[[nodiscard]] std::vector<std::string> config_keys();

}  // namespace mmspc
