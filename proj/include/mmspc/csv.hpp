#pragma once

// =============================================================================
// CSV emission: '.' decimal point, 9 significant digits, no locale.
// =============================================================================

#include "mmspc/harness.hpp"

#include <complex>
#include <string>
#include <vector>

namespace mmspc {

/// Shortest "%.9g"-style text, independent of the global locale.
[[nodiscard]] std::string format_double(double v);

/// t, level, i_l, state, then i_b_k, soc_k, group_k per module (k from 1).
void write_trace_csv(const Trace& trace, const std::string& path);
void write_control_csv(const Trace& trace, const std::string& path);
void write_spectrum_csv(const Spectrum& spectrum, const std::string& path);
void write_ageing_csv(const AgeingReport& report, const std::string& path);
void write_sweep_csv(const SweepReport& report, const std::string& path);
void write_sweep_switching_csv(const SweepReport& report, const std::string& path);
void write_summary_csv(const ComparisonReport& report, const std::string& path);
void write_randles_csv(const std::vector<double>& freqs,
                       const std::vector<std::complex<double>>& z, const std::string& path);

/// Reads one named numeric column of a CSV with a header row.
[[nodiscard]] std::vector<double> read_csv_column(const std::string& path, const std::string& column);

}  // namespace mmspc
