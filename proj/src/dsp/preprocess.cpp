#include "rosa/dsp/preprocess.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rosa/dsp/butterworth.hpp"
#include "rosa/dsp/fft.hpp"
#include "rosa/kern/kernels.hpp"

namespace rosa::dsp {

namespace {

int frame_count(const RangeTimeMatrix& r, double hop_s) {
    const double duration = double(r.n_chirps) / r.slow_time_rate_hz;
    return int(std::floor(duration / hop_s + 1e-9));
}

// window [center - w/2, center + w/2) clipped to the recording
std::pair<std::int64_t, std::int64_t> window_span(double center_s, double window_s, double rate,
                                                  std::int64_t n) {
    auto lo = std::int64_t(std::llround((center_s - window_s / 2) * rate));
    auto hi = std::int64_t(std::llround((center_s + window_s / 2) * rate));
    return {std::clamp<std::int64_t>(lo, 0, n), std::clamp<std::int64_t>(hi, 0, n)};
}

}  // namespace

RangeTimeMatrix range_transform(const BeatMatrix& beat, FftWindow window) {
    beat.validate();
    const int n = beat.config.samples_per_chirp;
    if (!std::has_single_bit(unsigned(n)))
        throw DataError("range_transform: samples_per_chirp must be a power of two");

    RangeTimeMatrix out;
    out.n_range_bins = n / 2;
    out.n_chirps = beat.n_chirps;
    out.bin_spacing_m = beat.config.range_resolution_m();
    out.slow_time_rate_hz = beat.config.frame_rate_hz;
    out.data.resize(std::size_t(out.n_range_bins) * out.n_chirps);

    std::vector<float> win;
    if (window == FftWindow::Hann) win = hann_window(n);

    // process chirps in blocks so the [bin][chirp] transpose stays cache-friendly
    constexpr std::int64_t kBlock = 64;
    std::vector<std::complex<float>> buf(std::size_t(kBlock) * n);
    for (std::int64_t t0 = 0; t0 < beat.n_chirps; t0 += kBlock) {
        const std::int64_t tn = std::min(kBlock, beat.n_chirps - t0);
        for (std::int64_t b = 0; b < tn; ++b) {
            auto* dst = buf.data() + b * n;
            const auto* src = beat.chirp(t0 + b);
            if (win.empty())
                std::copy(src, src + n, dst);
            else
                for (int i = 0; i < n; ++i) dst[i] = src[i] * win[i];
            fft_inplace(std::span<std::complex<float>>(dst, std::size_t(n)));
        }
        for (int r = 0; r < out.n_range_bins; ++r) {
            auto* row = out.row(r);
            for (std::int64_t b = 0; b < tn; ++b) row[t0 + b] = buf[std::size_t(b) * n + r];
        }
    }
    return out;
}

RangeTimeMatrix highpass_slow_time(const RangeTimeMatrix& r, double cutoff_hz) {
    if (!(r.slow_time_rate_hz > 2 * cutoff_hz))
        throw DataError("highpass: cutoff must be below nyquist");
    const SosFilter f = design_highpass(4, cutoff_hz, r.slow_time_rate_hz);
    RangeTimeMatrix out = r;
    for (int bin = 0; bin < out.n_range_bins; ++bin)
        filtfilt_complex(f, std::span(out.row(bin), std::size_t(out.n_chirps)));
    return out;
}

RangeTimeMatrix bandpass_slow_time(const RangeTimeMatrix& r, double low_hz, double high_hz) {
    if (!(0 < low_hz && low_hz < high_hz && high_hz < r.slow_time_rate_hz / 2))
        throw DataError("bandpass: need 0 < low < high < nyquist");
    const SosFilter f = design_bandpass(4, low_hz, high_hz, r.slow_time_rate_hz);
    RangeTimeMatrix out = r;
    for (int bin = 0; bin < out.n_range_bins; ++bin)
        filtfilt_complex(f, std::span(out.row(bin), std::size_t(out.n_chirps)));
    return out;
}

Spectrogram power_spectrogram(const RangeTimeMatrix& filtered, SpectrogramKind kind,
                              double window_s, double hop_s) {
    if (!(window_s >= hop_s)) throw DataError("power_spectrogram: window must cover the hop");
    if (window_s * filtered.slow_time_rate_hz < 2)
        throw DataError("power_spectrogram: window shorter than two samples");
    if (window_s > double(filtered.n_chirps) / filtered.slow_time_rate_hz)
        throw DataError("power_spectrogram: window longer than the recording");

    Spectrogram s;
    s.kind = kind;
    s.n_range_bins = filtered.n_range_bins;
    s.n_frames = frame_count(filtered, hop_s);
    s.frame_rate_hz = 1.0 / hop_s;
    s.bin_spacing_m = filtered.bin_spacing_m;
    s.data.resize(std::size_t(s.n_range_bins) * s.n_frames);

    for (int r = 0; r < s.n_range_bins; ++r) {
        const auto* row = filtered.row(r);
        for (int k = 0; k < s.n_frames; ++k) {
            auto [lo, hi] =
                window_span(k * hop_s, window_s, filtered.slow_time_rate_hz, filtered.n_chirps);
            const auto count = hi - lo;
            if (count <= 0) continue;
            // |x|^2 sum == sum of squares of the interleaved float pairs
            const float ss = kern::sum_sq<float>(reinterpret_cast<const float*>(row + lo),
                                                 std::size_t(count) * 2);
            s.at(r, k) = ss / float(count);
        }
    }
    return s;
}

Spectrogram doppler_principal(const RangeTimeMatrix& bandpassed, double window_s, double hop_s,
                              double gate) {
    if (bandpassed.slow_time_rate_hz * window_s < 32)
        throw DataError("doppler_principal: window too short");

    Spectrogram s;
    s.kind = SpectrogramKind::Doppler;
    s.n_range_bins = bandpassed.n_range_bins;
    s.n_frames = frame_count(bandpassed, hop_s);
    s.frame_rate_hz = 1.0 / hop_s;
    s.bin_spacing_m = bandpassed.bin_spacing_m;
    s.data.resize(std::size_t(s.n_range_bins) * s.n_frames);

    const double rate = bandpassed.slow_time_rate_hz;
    const auto full = std::size_t(std::llround(window_s * rate));
    const std::size_t nfft = std::bit_ceil(full);
    const int j_lo = int(std::ceil(0.1 * nfft / rate));
    const int j_hi = int(std::floor(5.0 * nfft / rate));

    std::vector<std::complex<float>> buf(nfft);
    for (int r = 0; r < s.n_range_bins; ++r) {
        const auto* row = bandpassed.row(r);
        for (int k = 0; k < s.n_frames; ++k) {
            auto [lo, hi] = window_span(k * hop_s, window_s, rate, bandpassed.n_chirps);
            const auto count = hi - lo;
            if (count <= 0) continue;
            const float power = kern::sum_sq<float>(reinterpret_cast<const float*>(row + lo),
                                                    std::size_t(count) * 2) /
                                float(count);
            if (power < gate) continue;  // gated cell stays 0

            std::fill(buf.begin(), buf.end(), std::complex<float>(0));
            std::copy(row + lo, row + hi, buf.begin());
            fft_inplace(std::span<std::complex<float>>(buf));
            int best = j_lo;
            float best_mag = 0;
            for (int j = j_lo; j <= j_hi; ++j) {
                const float m = std::norm(buf[j]);
                if (m > best_mag) {
                    best_mag = m;
                    best = j;
                }
            }
            s.at(r, k) = float(double(best) * rate / double(nfft));
        }
    }
    return s;
}

ThreeChannelSpectrogram concat_channels(Spectrogram xm, Spectrogram xb, Spectrogram xd,
                                        bool normalize) {
    if (xm.kind != SpectrogramKind::Movement || xb.kind != SpectrogramKind::Breathing ||
        xd.kind != SpectrogramKind::Doppler)
        throw DataError("concat_channels: channel order must be (movement, breathing, doppler)");
    auto same = [&](const Spectrogram& a, const Spectrogram& b) {
        return a.n_range_bins == b.n_range_bins && a.n_frames == b.n_frames &&
               a.frame_rate_hz == b.frame_rate_hz;
    };
    if (!same(xm, xb) || !same(xm, xd))
        throw DataError("concat_channels: channel dimensions disagree");

    ThreeChannelSpectrogram out;
    out.channels = {std::move(xm), std::move(xb), std::move(xd)};
    out.normalized = normalize;
    if (!normalize) return out;

    constexpr double kVarianceFloor = 1e-12;
    for (int c = 0; c < 3; ++c) {
        auto& ch = out.channels[c];
        const std::size_t n = ch.data.size();
        double mean = 0;
        for (float v : ch.data) mean += v;
        mean /= double(n);
        double var = 0;
        for (float v : ch.data) var += (v - mean) * (v - mean);
        var /= double(n);
        out.norms[c].mean = mean;
        if (var < kVarianceFloor) {
            out.norms[c].stddev = 0.0;  // degenerate channel, zeroed
            std::fill(ch.data.begin(), ch.data.end(), 0.0f);
        } else {
            const double sd = std::sqrt(var);
            out.norms[c].stddev = sd;
            for (float& v : ch.data) v = float((v - mean) / sd);
        }
    }
    return out;
}

ThreeChannelSpectrogram preprocess_session(const SleepSession& session,
                                           const PreprocessParams& params) {
    if (!session.beat) throw DataError("preprocess: session has no radar data");

    RangeTimeMatrix r = range_transform(*session.beat, params.fft_window);
    if (params.crop_bin_lo < 0 || params.crop_bin_hi > r.n_range_bins ||
        params.crop_bin_lo >= params.crop_bin_hi)
        throw DataError("preprocess: crop region outside the range axis");

    // crop the range axis first; every later stage is per-bin
    RangeTimeMatrix cropped;
    cropped.n_range_bins = params.crop_bin_hi - params.crop_bin_lo;
    cropped.n_chirps = r.n_chirps;
    cropped.bin_spacing_m = r.bin_spacing_m;
    cropped.slow_time_rate_hz = r.slow_time_rate_hz;
    cropped.data.assign(r.data.begin() + std::size_t(params.crop_bin_lo) * r.n_chirps,
                        r.data.begin() + std::size_t(params.crop_bin_hi) * r.n_chirps);
    r.data.clear();
    r.data.shrink_to_fit();

    Spectrogram xm;
    {
        RangeTimeMatrix hp = highpass_slow_time(cropped, params.highpass_cutoff_hz);
        xm = power_spectrogram(hp, SpectrogramKind::Movement, params.power_window_s, params.hop_s);
    }
    RangeTimeMatrix bp =
        bandpass_slow_time(cropped, params.bandpass_low_hz, params.bandpass_high_hz);
    cropped.data.clear();
    cropped.data.shrink_to_fit();
    Spectrogram xb =
        power_spectrogram(bp, SpectrogramKind::Breathing, params.power_window_s, params.hop_s);
    Spectrogram xd =
        doppler_principal(bp, params.doppler_window_s, params.hop_s, params.doppler_gate);

    return concat_channels(std::move(xm), std::move(xb), std::move(xd), params.normalize);
}

}  // namespace rosa::dsp
