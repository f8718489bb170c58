#pragma once

// =============================================================================
// Spectra, ripple ratios, degradation filter, Randles impedance and switching
// statistics.
// =============================================================================

#include "mmspc/topology.hpp"

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace mmspc {

struct SpectrumBin {
    double freq_hz = 0.0;
    double amplitude = 0.0;
};

struct Spectrum {
    std::vector<SpectrumBin> bins;
    double resolution = 0.0;
    std::string window = "rectangular";
};

/// One-sided amplitude spectrum: DC bin = |mean|, bins 0 < k < L/2 = 2|X_k|/L,
/// Nyquist bin (even L) = |X_k|/L.
[[nodiscard]] Spectrum amplitude_spectrum(const std::vector<double>& samples, double f_s);

/// Time-domain mean square recovered from the spectrum amplitudes.
[[nodiscard]] double spectrum_mean_square(const Spectrum& spectrum, std::size_t sample_count);

/// Largest bin with freq_hz > f_min (DC excluded when f_min >= 0).
[[nodiscard]] SpectrumBin largest_peak(const Spectrum& spectrum, double f_min = 0.0);

/// Largest bin in (0, f_max) divided by the DC amplitude.
[[nodiscard]] double low_frequency_content(const Spectrum& spectrum, double f_max);

/// Number of bins at multiples of `spacing` below f_max, skipping multiples of
/// `exclude_multiple_of`, whose amplitude exceeds factor times the median of all
/// non-DC bins below f_max.
[[nodiscard]] int sideband_count(const Spectrum& spectrum, double spacing, double f_max,
                                 double factor, double exclude_multiple_of);

/// RMS(x - mean) / |mean|.
[[nodiscard]] double ripple_ratio(const std::vector<double>& samples);

/// RMS(x) / |mean|.
[[nodiscard]] double rms_avg_ratio(const std::vector<double>& samples);

/// Step-invariant first-order low-pass with unity DC gain,
/// y[k+1] = a y[k] + (1 - a) x[k], a = exp(-2 pi f_c / f_s), y[0] = x[0].
[[nodiscard]] std::vector<double> degradation_filter(const std::vector<double>& samples,
                                                     double f_c, double f_s);

struct AgeingEntry {
    double fc_hz = 0.0;
    double ripple_ratio = 0.0;
};

struct AgeingReport {
    std::vector<AgeingEntry> entries;  ///< ascending cut-off
    double raw_rms_avg_ratio = 0.0;

    [[nodiscard]] double at(double fc_hz) const;
    [[nodiscard]] double lower() const { return entries.front().ripple_ratio; }
    [[nodiscard]] double upper() const { return entries.back().ripple_ratio; }
};

[[nodiscard]] AgeingReport ageing_metric(const std::vector<double>& samples,
                                         std::vector<double> cutoffs, double f_s);

struct RandlesParams {
    double r0 = 25e-3;
    double rct = 15e-3;
    double cdl = 1.0;
    double sigma_w = 5e-3;

    void validate() const;
};

/// Z = R0 + [(Rct + Zw)^-1 + j w Cdl]^-1, Zw = sigma w^-1/2 (1 - j).
[[nodiscard]] std::complex<double> randles_impedance(double f, const RandlesParams& p);

/// Element changes adjacent to the module (elements module-1 and module, where the
/// last element is the terminal) per tick, halved, scaled to Hz.
[[nodiscard]] double module_switch_rate(const std::vector<StringState>& trace, double f_s,
                                        std::size_t module);

/// Same count on canonical state indices of an n-module string.
[[nodiscard]] double module_switch_rate(const std::vector<std::size_t>& trace, int n, double f_s,
                                        std::size_t module);

/// Predicted per-module switching frequency f_rate / N (1 - m).
[[nodiscard]] double predicted_switch_rate(double f_rate, int n, double m);

// =============================================================================
// Pattern statistics
// =============================================================================

/// x minus its average over all fundamental periods at the same phase.
/// samples.size() must be a multiple of period_samples.
[[nodiscard]] std::vector<double> remove_periodic_mean(const std::vector<double>& samples,
                                                       std::size_t period_samples);

/// Biased, mean-removed autocorrelation normalized to lag 0, lags 0..max_lag.
[[nodiscard]] std::vector<double> autocorrelation(const std::vector<double>& samples,
                                                  std::size_t max_lag);

struct AutocorrPeak {
    double value = 0.0;
    double lag_s = 0.0;
};

/// Largest autocorrelation value in [lag_min, lag_max].
[[nodiscard]] AutocorrPeak autocorrelation_peak(const std::vector<double>& samples, double f_s,
                                                double lag_min, double lag_max);

/// Load pattern score: autocorrelation peak of the part of the module current that
/// does not repeat every fundamental period.
[[nodiscard]] AutocorrPeak pattern_peak(const std::vector<double>& samples, double f_s,
                                        double f_out, double lag_min, double lag_max);

}  // namespace mmspc
