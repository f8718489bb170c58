#pragma once

// =============================================================================
// Reference waveform, sigma-delta level modulator and prescribed phase current.
// =============================================================================

namespace mmspc {

struct WaveformSpec {
    double f_out = 50.0;     ///< load frequency [Hz]
    double f_rate = 20000.0; ///< modulator tick rate [Hz]
    double m = 0.7;          ///< modulation index
    double i_pk = 25.0;      ///< phase current amplitude [A]
    double phi = 0.0;        ///< current lag [rad]

    /// Throws std::invalid_argument when f_rate < 100 f_out or m outside [0, 1].
    void validate() const;
};

/// N m sin(2 pi f_out t), in level units.
[[nodiscard]] double reference_level(double t, const WaveformSpec& spec, int n);

/// i_pk sin(2 pi f_out t - phi).
[[nodiscard]] double phase_current(double t, const WaveformSpec& spec);

struct SigmaDeltaOutput {
    int level = 0;
    double acc = 0.0;
};

/// One step of a first-order error-feedback quantizer with unit steps.
/// d = acc + ref - prev_level decides the move (+-1 when |d| >= 0.5); the level is
/// clamped to [-N, N] and the accumulator keeps the running error sum(ref - level).
[[nodiscard]] SigmaDeltaOutput sigma_delta_step(double ref, int prev_level, double acc, int n);

/// Stateful wrapper owned by the simulation loop.
class SigmaDeltaModulator {
public:
    explicit SigmaDeltaModulator(int n) : n_(n) {}

    int step(double ref) {
        const auto out = sigma_delta_step(ref, level_, acc_, n_);
        level_ = out.level;
        acc_ = out.acc;
        return level_;
    }

    [[nodiscard]] int level() const { return level_; }
    [[nodiscard]] double accumulator() const { return acc_; }

private:
    int n_;
    int level_ = 0;
    double acc_ = 0.0;
};

}  // namespace mmspc
