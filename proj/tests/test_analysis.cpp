#include "mmspc/analysis.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

using namespace mmspc;
using Catch::Approx;

namespace {

std::vector<double> tone(double a, double f, double fs, double seconds, double offset = 0.0) {
    const auto n = static_cast<std::size_t>(std::llround(fs * seconds));
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = offset + a * std::sin(2 * M_PI * f * static_cast<double>(k) / fs);
    return x;
}

/// Direct O(L^2) DFT magnitude of bin k.
double dft_abs(const std::vector<double>& x, std::size_t k) {
    std::complex<double> acc{0.0, 0.0};
    const double l = static_cast<double>(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        acc += x[j] * std::polar(1.0, -2 * M_PI * static_cast<double>(k * j) / l);
    }
    return std::abs(acc);
}

/// Steady-state amplitude of the filtered tone over its last whole periods.
double filtered_gain(double f, double fc, double fs) {
    // Long enough for the start-up transient (time constant 1 / (2 pi fc)) to decay.
    const double seconds = std::max(40.0 / f, 20.0 / fc);
    const auto x = tone(1.0, f, fs, seconds);
    const auto y = degradation_filter(x, fc, fs);
    const auto tail = std::minmax_element(y.begin() + static_cast<std::ptrdiff_t>(y.size() / 2), y.end());
    return (*tail.second - *tail.first) / 2.0;
}

}  // namespace

TEST_CASE("Spectrum of a constant", "[analysis]") {
    const auto sp = amplitude_spectrum(std::vector<double>(400, 3.5), 20000.0);
    CHECK(sp.bins[0].amplitude == Approx(3.5));
    for (std::size_t k = 1; k < sp.bins.size(); ++k) REQUIRE(sp.bins[k].amplitude < 1e-12);
    CHECK(sp.window == "rectangular");
}

TEST_CASE("Spectrum of a pure tone", "[analysis]") {
    const auto x = tone(2.0, 100.0, 20000.0, 0.2);
    const auto sp = amplitude_spectrum(x, 20000.0);
    CHECK(sp.resolution == Approx(5.0));
    const auto peak = largest_peak(sp);
    CHECK(peak.freq_hz == Approx(100.0));
    CHECK(std::abs(peak.amplitude - 2.0) < 1e-9);
    for (const auto& b : sp.bins) {
        if (b.freq_hz != peak.freq_hz) REQUIRE(b.amplitude < 1e-9);
    }
    CHECK_THROWS_AS(amplitude_spectrum({1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("Spectrum agrees with a direct DFT and satisfies Parseval", "[analysis][property]") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(1.0, 2.0);
    for (std::size_t len : {64u, 101u, 256u}) {
        std::vector<double> x(len);
        for (auto& v : x) v = nd(rng);
        const auto sp = amplitude_spectrum(x, 1000.0);
        const double l = static_cast<double>(len);
        for (std::size_t k = 0; k < sp.bins.size(); ++k) {
            const bool edge = k == 0 || (len % 2 == 0 && k == len / 2);
            const double expect = (edge ? 1.0 : 2.0) * dft_abs(x, k) / l;
            REQUIRE(sp.bins[k].amplitude == Approx(expect).margin(1e-10));
        }
        double ms = 0.0;
        for (double v : x) ms += v * v / l;
        CHECK(spectrum_mean_square(sp, len) == Approx(ms).epsilon(1e-10));
    }
}

TEST_CASE("Low-frequency content and sideband count", "[analysis]") {
    auto x = tone(0.5, 10.0, 1000.0, 1.0, 4.0);
    const auto sp = amplitude_spectrum(x, 1000.0);
    CHECK(low_frequency_content(sp, 100.0) == Approx(0.125).margin(1e-9));

    std::vector<double> y(1000, 1.0);
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double t = static_cast<double>(k) / 1000.0;
        y[k] += 0.01 * std::sin(2 * M_PI * 3.0 * t) + 0.01 * std::sin(2 * M_PI * 7.0 * t);
        for (double f : {5.0, 10.0, 15.0, 50.0}) y[k] += 0.2 * std::sin(2 * M_PI * f * t);
    }
    // 50 Hz is a multiple of the fundamental and does not count.
    CHECK(sideband_count(amplitude_spectrum(y, 1000.0), 5.0, 100.0, 5.0, 50.0) == 3);
}

TEST_CASE("Ripple and RMS ratios", "[analysis]") {
    CHECK(ripple_ratio(std::vector<double>(100, 2.0)) == 0.0);
    CHECK(rms_avg_ratio(std::vector<double>(100, 2.0)) == Approx(1.0));
    const auto x = tone(1.0, 50.0, 20000.0, 0.2, 1.0);
    CHECK(std::abs(ripple_ratio(x) - 1.0 / std::sqrt(2.0)) < 1e-6);
    CHECK(rms_avg_ratio(x) == Approx(std::sqrt(1.5)).epsilon(1e-9));
    CHECK_THROWS_AS(ripple_ratio({1.0, -1.0, 1.0, -1.0}), std::domain_error);
    CHECK_THROWS_AS(rms_avg_ratio(std::vector<double>(10, 0.0)), std::domain_error);
}

TEST_CASE("Degradation filter gains", "[analysis]") {
    const auto dc = degradation_filter(std::vector<double>(20000, 3.0), 5.0, 20000.0);
    CHECK(std::abs(dc.back() - 3.0) < 1e-6 * 3.0);
    CHECK(dc.front() == 3.0);

    CHECK(filtered_gain(50.0, 50.0, 20000.0) == Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));
    CHECK(filtered_gain(5.0, 5.0, 20000.0) == Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));
    // A 20 kHz tone needs a faster sample clock to be represented.
    CHECK(filtered_gain(20000.0, 100.0, 2.0e6) <= 0.006);

    CHECK_THROWS_AS(degradation_filter({1.0, 2.0}, 0.0, 1000.0), std::invalid_argument);
    CHECK_THROWS_AS(degradation_filter({1.0, 2.0}, 600.0, 1000.0), std::invalid_argument);
}

TEST_CASE("Filter gain is monotone in frequency", "[analysis][property]") {
    double prev = 1.0;
    for (double f : {1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0}) {
        const double g = filtered_gain(f, 50.0, 20000.0);
        REQUIRE(g < prev);
        prev = g;
    }
}

TEST_CASE("Ageing metric", "[analysis]") {
    const auto dc = ageing_metric(std::vector<double>(4000, 5.0), {5, 50, 100}, 20000.0);
    for (const auto& e : dc.entries) CHECK(e.ripple_ratio == Approx(0.0).margin(1e-12));

    const auto ac = ageing_metric(tone(1.0, 100.0, 20000.0, 2.0, 2.0), {100, 5, 50}, 20000.0);
    REQUIRE(ac.entries.size() == 3);
    CHECK(ac.entries.front().fc_hz == 5.0);
    CHECK(ac.lower() < 0.2 * ac.upper());
    CHECK(ac.at(5.0) < ac.at(50.0));
    CHECK(ac.at(50.0) < ac.at(100.0));
    CHECK(ac.raw_rms_avg_ratio == Approx(std::sqrt(1.0 + 0.125)).epsilon(1e-6));
    CHECK_THROWS(ac.at(7.0));
}

TEST_CASE("Randles impedance", "[analysis]") {
    RandlesParams p;
    // Direct complex evaluation at 1 Hz.
    const double w = 2 * M_PI * 1.0;
    const std::complex<double> j{0.0, 1.0};
    const std::complex<double> zw = p.sigma_w / std::sqrt(w) * (1.0 - j);
    const std::complex<double> expect = p.r0 + 1.0 / (1.0 / (p.rct + zw) + j * w * p.cdl);
    const auto z = randles_impedance(1.0, p);
    CHECK(std::abs(z - expect) < 1e-15);
    CHECK(std::abs(randles_impedance(1e9, p) - std::complex<double>(p.r0, 0.0)) < 1e-9);

    // Warburg tail: |Z - R0| scales as w^-1/2 at very low frequency, once Rct is small
    // next to the diffusion term.
    const double z1 = std::abs(randles_impedance(1e-7, p) - p.r0);
    const double z2 = std::abs(randles_impedance(1e-9, p) - p.r0);
    CHECK(z2 / z1 == Approx(10.0).epsilon(0.01));
    CHECK_THROWS_AS(randles_impedance(0.0, p), std::invalid_argument);
}

TEST_CASE("Switch rate", "[analysis]") {
    const auto s = parse_state("PPPPS+");
    CHECK(module_switch_rate(std::vector<StringState>(100, s), 20000.0, 2) == 0.0);

    // Module 2 (0-based) touches elements 1 and 2: toggling element 2 every tick gives
    // one change per tick, half an event, over all ticks.
    std::vector<StringState> trace;
    std::vector<std::size_t> idx;
    for (int k = 0; k < 100; ++k) {
        auto x = s;
        if (k % 2) x[2] = ConnectionElement::Bypass;
        trace.push_back(x);
        idx.push_back(state_index(x));
    }
    CHECK(module_switch_rate(trace, 20000.0, 2) == Approx(99.0 * 20000.0 / 100.0 / 2.0));
    CHECK(module_switch_rate(trace, 20000.0, 3) == Approx(99.0 * 20000.0 / 100.0 / 2.0));
    CHECK(module_switch_rate(trace, 20000.0, 1) == 0.0);
    for (std::size_t m = 0; m < 5; ++m) {
        CHECK(module_switch_rate(idx, 5, 20000.0, m) == module_switch_rate(trace, 20000.0, m));
    }
    CHECK(predicted_switch_rate(20000.0, 5, 0.7) == Approx(1200.0));
    CHECK(predicted_switch_rate(20000.0, 5, 1.0) == 0.0);
}

TEST_CASE("Periodic mean removal and autocorrelation", "[analysis]") {
    // A strictly periodic signal leaves nothing behind.
    const auto p = tone(1.0, 50.0, 20000.0, 0.2, 3.0);
    for (double v : remove_periodic_mean(p, 400)) REQUIRE(std::abs(v) < 1e-12);
    CHECK_THROWS(remove_periodic_mean(std::vector<double>(401, 0.0), 400));

    // Square wave with 100 ms period: autocorrelation peaks at its period.
    std::vector<double> sq(20000);
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = (k / 1000) % 2 ? 1.0 : -1.0;
    const auto ac = autocorrelation(sq, 4000);
    CHECK(ac[0] == Approx(1.0));
    const auto peak = autocorrelation_peak(sq, 10000.0, 0.15, 0.3);
    CHECK(peak.lag_s == Approx(0.2));
    CHECK(peak.value > 0.8);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> noise(20000);
    for (auto& v : noise) v = nd(rng);
    CHECK(autocorrelation_peak(noise, 20000.0, 0.02, 0.5).value < 0.1);
}

TEST_CASE("Ratio identity and spectrum linearity", "[analysis][property]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(500);
        for (auto& v : x) v = 3.0 + nd(rng);
        const double rr = ripple_ratio(x);
        const double ra = rms_avg_ratio(x);
        REQUIRE(rr <= ra);
        REQUIRE(ra * ra == Approx(1.0 + rr * rr).epsilon(1e-12));

        std::vector<double> y = x;
        for (auto& v : y) v *= -2.5;
        const auto sx = amplitude_spectrum(x, 1000.0);
        const auto sy = amplitude_spectrum(y, 1000.0);
        for (std::size_t k = 0; k < sx.bins.size(); ++k) {
            REQUIRE(sy.bins[k].amplitude == Approx(2.5 * sx.bins[k].amplitude).margin(1e-12));
        }
    }
}
