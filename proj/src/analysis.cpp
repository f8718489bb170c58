#include "mmspc/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace mmspc {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

/// Forward real FFT of `in` zero-padded to `size`; returns size/2 + 1 bins.
std::vector<std::complex<double>> real_fft(const std::vector<double>& in, std::size_t size) {
    const std::size_t out_len = size / 2 + 1;
    std::unique_ptr<double, decltype(&fftw_free)> buf(fftw_alloc_real(size), &fftw_free);
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(out_len), &fftw_free);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(size), buf.get(), out.get(), FFTW_ESTIMATE);
    }
    std::fill(buf.get(), buf.get() + size, 0.0);
    std::copy(in.begin(), in.end(), buf.get());
    fftw_execute(plan);
    std::vector<std::complex<double>> result(out_len);
    for (std::size_t k = 0; k < out_len; ++k) {
        result[k] = {out.get()[k][0], out.get()[k][1]};
    }
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return result;
}

std::vector<double> inverse_real_fft(const std::vector<std::complex<double>>& in, std::size_t size) {
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> buf(fftw_alloc_complex(in.size()), &fftw_free);
    std::unique_ptr<double, decltype(&fftw_free)> out(fftw_alloc_real(size), &fftw_free);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(size), buf.get(), out.get(), FFTW_ESTIMATE);
    }
    for (std::size_t k = 0; k < in.size(); ++k) {
        buf.get()[k][0] = in[k].real();
        buf.get()[k][1] = in[k].imag();
    }
    fftw_execute(plan);
    std::vector<double> result(out.get(), out.get() + size);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return result;
}

double mean_of(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double checked_mean(const std::vector<double>& x) {
    if (x.empty()) {
        throw std::invalid_argument("empty sample sequence");
    }
    const double mean = mean_of(x);
    if (mean == 0.0) {
        throw std::domain_error("ratio undefined for zero-mean signal");
    }
    return mean;
}

}  // namespace

// =============================================================================
// Spectrum
// =============================================================================

Spectrum amplitude_spectrum(const std::vector<double>& samples, double f_s) {
    if (samples.size() < 2) {
        throw std::invalid_argument("spectrum needs at least 2 samples");
    }
    if (!(f_s > 0.0)) {
        throw std::invalid_argument("sample rate must be positive");
    }
    const std::size_t len = samples.size();
    const auto x = real_fft(samples, len);
    Spectrum s;
    s.resolution = f_s / static_cast<double>(len);
    s.bins.resize(x.size());
    const double l = static_cast<double>(len);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const bool edge = k == 0 || (len % 2 == 0 && k == len / 2);
        s.bins[k].freq_hz = static_cast<double>(k) * s.resolution;
        s.bins[k].amplitude = (edge ? 1.0 : 2.0) * std::abs(x[k]) / l;
    }
    return s;
}

double spectrum_mean_square(const Spectrum& spectrum, std::size_t sample_count) {
    double e = 0.0;
    for (std::size_t k = 0; k < spectrum.bins.size(); ++k) {
        const double a = spectrum.bins[k].amplitude;
        const bool edge = k == 0 || (sample_count % 2 == 0 && k == sample_count / 2);
        e += edge ? a * a : 0.5 * a * a;
    }
    return e;
}

SpectrumBin largest_peak(const Spectrum& spectrum, double f_min) {
    SpectrumBin best{0.0, -1.0};
    for (const auto& b : spectrum.bins) {
        if (b.freq_hz > f_min && b.amplitude > best.amplitude) {
            best = b;
        }
    }
    return best;
}

double low_frequency_content(const Spectrum& spectrum, double f_max) {
    const double dc = spectrum.bins.at(0).amplitude;
    double worst = 0.0;
    for (std::size_t k = 1; k < spectrum.bins.size() && spectrum.bins[k].freq_hz < f_max; ++k) {
        worst = std::max(worst, spectrum.bins[k].amplitude);
    }
    return dc > 0.0 ? worst / dc : std::numeric_limits<double>::infinity();
}

int sideband_count(const Spectrum& spectrum, double spacing, double f_max, double factor,
                   double exclude_multiple_of) {
    std::vector<double> low;
    for (std::size_t k = 1; k < spectrum.bins.size() && spectrum.bins[k].freq_hz < f_max; ++k) {
        low.push_back(spectrum.bins[k].amplitude);
    }
    if (low.empty()) {
        return 0;
    }
    auto mid = low.begin() + static_cast<std::ptrdiff_t>(low.size() / 2);
    std::nth_element(low.begin(), mid, low.end());
    const double median = *mid;
    const double tol = 1e-6 * spectrum.resolution;
    auto is_multiple = [tol](double f, double base) {
        const double q = std::round(f / base);
        return q >= 1.0 && std::abs(f - q * base) < tol + 1e-9 * f;
    };
    int count = 0;
    for (std::size_t k = 1; k < spectrum.bins.size() && spectrum.bins[k].freq_hz < f_max; ++k) {
        const double f = spectrum.bins[k].freq_hz;
        if (!is_multiple(f, spacing)) {
            continue;
        }
        if (exclude_multiple_of > 0.0 && is_multiple(f, exclude_multiple_of)) {
            continue;
        }
        count += spectrum.bins[k].amplitude > factor * median;
    }
    return count;
}

// =============================================================================
// Ratios and filter
// =============================================================================

double ripple_ratio(const std::vector<double>& samples) {
    const double mean = checked_mean(samples);
    double ss = 0.0;
    for (double v : samples) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(samples.size())) / std::abs(mean);
}

double rms_avg_ratio(const std::vector<double>& samples) {
    const double mean = checked_mean(samples);
    double ss = 0.0;
    for (double v : samples) {
        ss += v * v;
    }
    return std::sqrt(ss / static_cast<double>(samples.size())) / std::abs(mean);
}

std::vector<double> degradation_filter(const std::vector<double>& samples, double f_c, double f_s) {
    if (!(f_s > 0.0) || !(f_c > 0.0) || !(f_c < 0.5 * f_s)) {
        throw std::invalid_argument("cut-off must satisfy 0 < f_c < f_s / 2");
    }
    std::vector<double> y(samples.size());
    if (samples.empty()) {
        return y;
    }
    const double a = std::exp(-2.0 * std::numbers::pi * f_c / f_s);
    y[0] = samples[0];
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        y[k + 1] = a * y[k] + (1.0 - a) * samples[k];
    }
    return y;
}

double AgeingReport::at(double fc_hz) const {
    for (const auto& e : entries) {
        if (std::abs(e.fc_hz - fc_hz) < 1e-9) {
            return e.ripple_ratio;
        }
    }
    throw std::out_of_range("no ageing entry for cut-off " + std::to_string(fc_hz));
}

AgeingReport ageing_metric(const std::vector<double>& samples, std::vector<double> cutoffs,
                           double f_s) {
    if (cutoffs.empty()) {
        throw std::invalid_argument("ageing metric needs at least one cut-off");
    }
    std::sort(cutoffs.begin(), cutoffs.end());
    AgeingReport r;
    r.raw_rms_avg_ratio = rms_avg_ratio(samples);
    for (double fc : cutoffs) {
        r.entries.push_back({fc, ripple_ratio(degradation_filter(samples, fc, f_s))});
    }
    return r;
}

// =============================================================================
// Randles
// =============================================================================

void RandlesParams::validate() const {
    if (!(r0 > 0.0 && rct > 0.0 && cdl > 0.0 && sigma_w > 0.0)) {
        throw std::invalid_argument("Randles parameters must be positive");
    }
}

std::complex<double> randles_impedance(double f, const RandlesParams& p) {
    if (!(f > 0.0)) {
        throw std::invalid_argument("impedance frequency must be positive");
    }
    using namespace std::complex_literals;
    const double w = 2.0 * std::numbers::pi * f;
    const std::complex<double> zw = p.sigma_w / std::sqrt(w) * (1.0 - 1.0i);
    const std::complex<double> y = 1.0 / (p.rct + zw) + 1.0i * w * p.cdl;
    return p.r0 + 1.0 / y;
}

// =============================================================================
// Switching
// =============================================================================

double module_switch_rate(const std::vector<StringState>& trace, double f_s, std::size_t module) {
    if (trace.size() < 2) {
        throw std::invalid_argument("switch rate needs at least 2 trace entries");
    }
    const std::size_t n = trace.front().size();
    if (module >= n) {
        throw std::out_of_range("module index outside string");
    }
    std::size_t changes = 0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        if (module > 0) {
            changes += trace[k][module - 1] != trace[k - 1][module - 1];
        }
        changes += trace[k][module] != trace[k - 1][module];
    }
    return static_cast<double>(changes) * f_s / static_cast<double>(trace.size()) / 2.0;
}

double module_switch_rate(const std::vector<std::size_t>& trace, int n, double f_s,
                          std::size_t module) {
    if (trace.size() < 2) {
        throw std::invalid_argument("switch rate needs at least 2 trace entries");
    }
    if (module >= static_cast<std::size_t>(n)) {
        throw std::out_of_range("module index outside string");
    }
    auto element = [n](std::size_t idx, std::size_t e) {
        const auto shift = 2 * (static_cast<std::size_t>(n) - 1 - e);
        return (idx >> shift) & 3u;
    };
    std::size_t changes = 0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        if (module > 0) {
            changes += element(trace[k], module - 1) != element(trace[k - 1], module - 1);
        }
        changes += element(trace[k], module) != element(trace[k - 1], module);
    }
    return static_cast<double>(changes) * f_s / static_cast<double>(trace.size()) / 2.0;
}

double predicted_switch_rate(double f_rate, int n, double m) { return f_rate / n * (1.0 - m); }

// =============================================================================
// Patterns
// =============================================================================

std::vector<double> remove_periodic_mean(const std::vector<double>& samples,
                                         std::size_t period_samples) {
    if (period_samples == 0 || samples.size() % period_samples != 0) {
        throw std::invalid_argument("sample count must be a whole number of periods");
    }
    const std::size_t periods = samples.size() / period_samples;
    std::vector<double> avg(period_samples, 0.0);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        avg[k % period_samples] += samples[k];
    }
    for (auto& v : avg) {
        v /= static_cast<double>(periods);
    }
    std::vector<double> out(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        out[k] = samples[k] - avg[k % period_samples];
    }
    return out;
}

std::vector<double> autocorrelation(const std::vector<double>& samples, std::size_t max_lag) {
    if (samples.size() < 2) {
        throw std::invalid_argument("autocorrelation needs at least 2 samples");
    }
    max_lag = std::min(max_lag, samples.size() - 1);
    const double mean = mean_of(samples);
    std::vector<double> x(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        x[k] = samples[k] - mean;
    }
    const std::size_t size = 2 * samples.size();
    auto spec = real_fft(x, size);
    for (auto& v : spec) {
        v = std::norm(v);
    }
    const auto r = inverse_real_fft(spec, size);
    std::vector<double> out(max_lag + 1, 0.0);
    if (r[0] <= 0.0) {
        return out;
    }
    for (std::size_t k = 0; k <= max_lag; ++k) {
        out[k] = r[k] / r[0];
    }
    return out;
}

AutocorrPeak autocorrelation_peak(const std::vector<double>& samples, double f_s, double lag_min,
                                  double lag_max) {
    if (!(lag_min >= 0.0) || !(lag_max >= lag_min)) {
        throw std::invalid_argument("bad lag window");
    }
    const auto lo = static_cast<std::size_t>(std::ceil(lag_min * f_s - 1e-9));
    const auto hi = static_cast<std::size_t>(std::floor(lag_max * f_s + 1e-9));
    const auto r = autocorrelation(samples, hi);
    AutocorrPeak best{-1.0, 0.0};
    for (std::size_t k = lo; k < r.size(); ++k) {
        if (r[k] > best.value) {
            best = {r[k], static_cast<double>(k) / f_s};
        }
    }
    return best;
}

AutocorrPeak pattern_peak(const std::vector<double>& samples, double f_s, double f_out,
                          double lag_min, double lag_max) {
    const auto period = static_cast<std::size_t>(std::llround(f_s / f_out));
    return autocorrelation_peak(remove_periodic_mean(samples, period), f_s, lag_min, lag_max);
}

}  // namespace mmspc
