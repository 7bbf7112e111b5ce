#pragma once

#include <complex>
#include <span>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::dsp {

// One second-order section, direct form II transposed, normalized a0 = 1.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0;
    double a1 = 0, a2 = 0;
};

struct SosFilter {
    std::vector<Biquad> sections;
    double sample_rate_hz = 0;

    // H(e^{j 2 pi f / fs}) of the single (forward) pass
    std::complex<double> response(double f_hz) const;
    double gain_at(double f_hz) const { return std::abs(response(f_hz)); }
    // forward-backward magnitude response (zero phase)
    double zero_phase_gain_at(double f_hz) const {
        double g = gain_at(f_hz);
        return g * g;
    }
};

// Butterworth designs via analog prototype + bilinear transform with
// frequency prewarping. `order` is the prototype order: the high-pass has
// `order` poles, the band-pass 2*`order`.
SosFilter design_highpass(int order, double cutoff_hz, double fs);
SosFilter design_bandpass(int order, double low_hz, double high_hz, double fs);

// Zero-phase filtering: odd-reflection padding, steady-state initial
// conditions, forward pass, backward pass.
std::vector<double> filtfilt(const SosFilter& f, std::span<const double> x);

// per-component filtfilt on a complex series, in place
void filtfilt_complex(const SosFilter& f, std::span<std::complex<float>> x);

}  // namespace rosa::dsp
