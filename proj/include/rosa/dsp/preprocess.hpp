#pragma once

#include "rosa/dsp/spectrogram.hpp"

namespace rosa::dsp {

enum class FftWindow { Rect, Hann };

// Windowed fast-time FFT, one-sided spectrum (bins 0 .. N/2 - 1).
RangeTimeMatrix range_transform(const BeatMatrix& beat, FftWindow window = FftWindow::Hann);

// Zero-phase slow-time filters, applied independently per range bin.
RangeTimeMatrix highpass_slow_time(const RangeTimeMatrix& r, double cutoff_hz = 5.0);
RangeTimeMatrix bandpass_slow_time(const RangeTimeMatrix& r, double low_hz = 0.1,
                                   double high_hz = 5.0);

// Mean squared magnitude per (bin, window); windows centered at k * hop.
Spectrogram power_spectrogram(const RangeTimeMatrix& filtered, SpectrogramKind kind,
                              double window_s = 4.0, double hop_s = 1.0);

// Dominant STFT frequency in [0.1, 5] Hz per (bin, window); cells whose
// window power is below `gate` emit 0.
Spectrogram doppler_principal(const RangeTimeMatrix& bandpassed, double window_s = 16.0,
                              double hop_s = 1.0, double gate = 0.01);

ThreeChannelSpectrogram concat_channels(Spectrogram xm, Spectrogram xb, Spectrogram xd,
                                        bool normalize);

struct PreprocessParams {
    FftWindow fft_window = FftWindow::Hann;
    double highpass_cutoff_hz = 5.0;
    double bandpass_low_hz = 0.1;
    double bandpass_high_hz = 5.0;
    double power_window_s = 4.0;
    double doppler_window_s = 16.0;
    double hop_s = 1.0;
    double doppler_gate = 0.01;
    int crop_bin_lo = 4;   // inclusive
    int crop_bin_hi = 36;  // exclusive; default keeps 32 bins (0.2 - 1.8 m)
    bool normalize = true;
};

ThreeChannelSpectrogram preprocess_session(const SleepSession& session,
                                           const PreprocessParams& params = {});

}  // namespace rosa::dsp
