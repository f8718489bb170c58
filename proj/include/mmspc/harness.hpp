#pragma once

// =============================================================================
// Tick loop, comparison and sweep experiments.
// =============================================================================

#include "mmspc/analysis.hpp"
#include "mmspc/config.hpp"

#include <cstddef>
#include <vector>

namespace mmspc {

struct TickRecord {
    double t = 0.0;
    int level = 0;
    double i_l = 0.0;
    std::size_t state = 0;  ///< canonical state index
    std::vector<double> i_b;
    std::vector<double> soc;
};

struct Trace {
    int n = 0;
    double f_s = 0.0;
    Method method = Method::Proposed;
    std::vector<TickRecord> records;
    /// Per-tick controller output and battery-frame observer estimate (proposed methods only).
    std::vector<std::vector<double>> j_star;
    std::vector<std::vector<double>> j_hat;

    [[nodiscard]] std::vector<double> module_current(std::size_t module) const;
    [[nodiscard]] std::vector<double> module_soc(std::size_t module) const;
    [[nodiscard]] std::vector<std::size_t> states() const;
    [[nodiscard]] std::vector<double> levels() const;
};

/// Modules and interconnect as configured, including seeded jitter.
[[nodiscard]] std::vector<BatteryModule> initial_modules(const ScenarioConfig& cfg);
[[nodiscard]] InterconnectResistances initial_interconnect(const ScenarioConfig& cfg);

/// Runs the tick loop: modulator, scheduler, group solves, battery update.
/// Throws SchedulerDeadEnd if a selected state ever misses the emitted level.
[[nodiscard]] Trace run_scenario(const ScenarioConfig& cfg);

struct MethodSummary {
    Method method = Method::Proposed;
    std::size_t module = 0;
    Spectrum spectrum;
    AgeingReport ageing;
    double rms_avg = 0.0;
    double ripple = 0.0;
    AutocorrPeak pattern;       ///< non-periodic part of the module current
    AutocorrPeak raw_autocorr;  ///< module current as is
    double switch_rate = 0.0;   ///< target module [Hz]
    double switch_rate_mean = 0.0;
    double low_freq_content = 0.0;  ///< largest bin below 2 f_out over DC
    SpectrumBin peak;               ///< largest non-DC bin
    int sidebands = 0;              ///< 5 Hz sidebands below 2 f_out above 5x median
};

[[nodiscard]] MethodSummary summarize(const Trace& trace, const ScenarioConfig& cfg);

/// Proposed run: cfg with method proposed. Reference run: cfg with method reference.
struct ComparisonReport {
    ScenarioConfig proposed_cfg;
    ScenarioConfig reference_cfg;
    Trace proposed;
    Trace reference;
    MethodSummary proposed_summary;
    MethodSummary reference_summary;
};

[[nodiscard]] ComparisonReport compare_methods(const ScenarioConfig& cfg);

struct SweepRow {
    double m = 0.0;
    Method method = Method::Proposed;
    double fc_hz = 0.0;
    double ripple_ratio = 0.0;
};

struct SweepSwitchRow {
    double m = 0.0;
    Method method = Method::Proposed;
    double switch_rate = 0.0;
    double switch_rate_mean = 0.0;
    double predicted = 0.0;
    double rms_avg = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;  ///< ordered by m, method, cut-off
    std::vector<SweepSwitchRow> switching;
};

[[nodiscard]] SweepReport sweep_modulation(const ScenarioConfig& cfg,
                                           const std::vector<double>& m_values);

}  // namespace mmspc
