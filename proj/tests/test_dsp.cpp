#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "rosa/dsp/butterworth.hpp"
#include "rosa/dsp/fft.hpp"
#include "rosa/dsp/preprocess.hpp"
#include "rosa/dsp/spectrogram.hpp"

using namespace rosa;
using std::numbers::pi;

TEST_CASE("fft matches the direct dft") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {std::size_t(8), std::size_t(64), std::size_t(256)}) {
        std::vector<std::complex<double>> x(n);
        for (auto& v : x) v = {u(rng), u(rng)};
        auto y = x;
        dsp::fft_inplace(std::span(y));
        for (std::size_t k = 0; k < n; k += n / 8) {
            const auto ref = dsp::dft_coefficient(std::span<const std::complex<double>>(x), k);
            CHECK(std::abs(y[k] - ref) < 1e-9 * double(n));
        }
    }
}

TEST_CASE("hann window endpoints and symmetry") {
    const auto w = dsp::hann_window(64);
    REQUIRE(w.size() == 64);
    CHECK(w[0] == 0.0f);
    // periodic Hann: w[i] == w[n - i] and the mean is exactly 1/2
    for (std::size_t i = 1; i < 32; ++i)
        CHECK(double(w[i]) == doctest::Approx(double(w[64 - i])).epsilon(1e-6));
    double mean = 0;
    for (float v : w) mean += v;
    CHECK(mean / 64 == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("butterworth highpass matches analytic magnitude") {
    const double fs = 50.0;
    const auto hp = dsp::design_highpass(4, 5.0, fs);
    // |H| for a bilinear-transformed order-4 Butterworth highpass:
    // 1 / sqrt(1 + (wc/w)^8) in prewarped analog frequency
    const double wc = 2.0 * fs * std::tan(pi * 5.0 / fs);
    for (double f : {1.0, 3.0, 5.0, 8.0, 15.0, 24.0}) {
        const double w = 2.0 * fs * std::tan(pi * f / fs);
        const double expected = 1.0 / std::sqrt(1.0 + std::pow(wc / w, 8));
        CHECK(hp.gain_at(f) == doctest::Approx(expected).epsilon(1e-9));
    }
    CHECK(hp.gain_at(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    // -3 dB point at the design cutoff
    CHECK(hp.gain_at(5.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("butterworth bandpass matches analytic magnitude") {
    const double fs = 50.0;
    const auto bp = dsp::design_bandpass(4, 0.1, 5.0, fs);
    const double w1 = 2.0 * fs * std::tan(pi * 0.1 / fs);
    const double w2 = 2.0 * fs * std::tan(pi * 5.0 / fs);
    const double bw = w2 - w1, w0sq = w1 * w2;
    for (double f : {0.05, 0.1, 0.25, 1.0, 3.0, 5.0, 10.0, 20.0}) {
        const double w = 2.0 * fs * std::tan(pi * f / fs);
        const double q = (w * w - w0sq) / (bw * w);
        const double expected = 1.0 / std::sqrt(1.0 + std::pow(q, 8));
        CHECK(bp.gain_at(f) == doctest::Approx(expected).epsilon(1e-7));
    }
    CHECK(bp.gain_at(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    // passband center is essentially unity
    CHECK(bp.gain_at(0.7) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("analytic response agrees with a measured sine") {
    const double fs = 50.0;
    const auto hp = dsp::design_highpass(4, 5.0, fs);
    const double f = 8.0;
    const int n = 5000;
    // independent oracle: run the cascade sample by sample (DF2T)
    std::vector<double> y(n);
    std::vector<std::array<double, 2>> z(hp.sections.size(), {0.0, 0.0});
    for (int i = 0; i < n; ++i) {
        double v = std::sin(2.0 * pi * f * i / fs);
        for (std::size_t s = 0; s < hp.sections.size(); ++s) {
            const auto& q = hp.sections[s];
            const double out = q.b0 * v + z[s][0];
            z[s][0] = q.b1 * v - q.a1 * out + z[s][1];
            z[s][1] = q.b2 * v - q.a2 * out;
            v = out;
        }
        y[std::size_t(i)] = v;
    }
    double amp = 0;
    for (int i = n - 500; i < n; ++i) amp = std::max(amp, std::abs(y[std::size_t(i)]));
    CHECK(amp == doctest::Approx(hp.gain_at(f)).epsilon(1e-3));
}

TEST_CASE("filtfilt is zero phase and kills dc") {
    const double fs = 50.0;
    const auto hp = dsp::design_highpass(4, 5.0, fs);
    const int n = 2000;

    // constant input: forward-backward highpass must return ~0 everywhere
    std::vector<double> c(n, 3.7);
    const auto zc = dsp::filtfilt(hp, c);
    for (double v : zc) CHECK(std::abs(v) < 1e-6);

    // passband sine comes back with squared gain and no phase shift
    const double f = 15.0;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = std::sin(2.0 * pi * f * i / fs);
    const auto y = dsp::filtfilt(hp, x);
    const double g2 = hp.zero_phase_gain_at(f);
    for (int i = 500; i < n - 500; ++i)
        CHECK(y[std::size_t(i)] == doctest::Approx(g2 * x[std::size_t(i)]).epsilon(5e-3));
}

namespace {

BeatMatrix point_target(double range_m, int n_chirps) {
    BeatMatrix beat;
    beat.n_chirps = n_chirps;
    beat.data.resize(std::size_t(n_chirps) * beat.config.samples_per_chirp);
    const auto& rc = beat.config;
    // beat frequency for a static reflector: f_b = 2 B R / (c T_chirp);
    // per-sample phase step is 2 pi R / (N dR) with dR the bin spacing
    const double step = 2.0 * pi * range_m / (rc.samples_per_chirp * rc.range_resolution_m());
    for (std::int64_t t = 0; t < n_chirps; ++t)
        for (int k = 0; k < rc.samples_per_chirp; ++k)
            beat.chirp(t)[k] = std::complex<float>(std::polar(1.0, step * k));
    return beat;
}

}  // namespace

TEST_CASE("point target lands in the expected range bin") {
    const auto beat = point_target(1.0, 100);
    const auto r = dsp::range_transform(beat);
    CHECK(r.n_range_bins == 128);
    CHECK(r.bin_spacing_m == doctest::Approx(0.05).epsilon(1e-3));
    // argmax over range at a fixed chirp
    int best = 0;
    double best_mag = 0;
    for (int b = 0; b < r.n_range_bins; ++b) {
        const double m = std::abs(r.row(b)[50]);
        if (m > best_mag) {
            best_mag = m;
            best = b;
        }
    }
    CHECK(std::abs(best - 20) <= 1);
}

TEST_CASE("power spectrogram frame layout") {
    RangeTimeMatrix r;
    r.n_range_bins = 2;
    r.n_chirps = 500;  // 10 s at 50 Hz
    r.slow_time_rate_hz = 50.0;
    r.bin_spacing_m = 0.05;
    r.data.assign(std::size_t(r.n_range_bins) * r.n_chirps, {2.0f, 0.0f});
    const auto s = dsp::power_spectrogram(r, dsp::SpectrogramKind::Movement, 4.0, 1.0);
    CHECK(s.n_range_bins == 2);
    CHECK(s.n_frames == 10);
    CHECK(s.frame_rate_hz == 1.0);
    // mean |x|^2 of a constant magnitude-2 signal is 4
    for (int k = 2; k < 8; ++k) CHECK(s.at(0, k) == doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("doppler principal frequency finds the modulation rate") {
    RangeTimeMatrix r;
    r.n_range_bins = 1;
    r.n_chirps = 6000;  // 120 s
    r.slow_time_rate_hz = 50.0;
    r.bin_spacing_m = 0.05;
    r.data.resize(std::size_t(r.n_chirps));
    const double f = 0.5;
    for (std::int64_t t = 0; t < r.n_chirps; ++t)
        r.data[std::size_t(t)] = std::complex<float>(std::polar(1.0, 2.0 * pi * f * t / 50.0));
    const auto s = dsp::doppler_principal(r, 16.0, 1.0);
    CHECK(s.n_frames == 120);
    // 16 s window at 50 Hz -> 1024-point transform, ~0.05 Hz resolution
    for (int k = 20; k < 100; ++k) CHECK(s.at(0, k) == doctest::Approx(f).epsilon(0.12));
}

TEST_CASE("channel concatenation normalizes per channel") {
    auto make = [](float base) {
        dsp::Spectrogram s;
        s.n_range_bins = 4;
        s.n_frames = 50;
        s.frame_rate_hz = 1.0;
        s.bin_spacing_m = 0.05;
        s.data.resize(200);
        for (std::size_t i = 0; i < s.data.size(); ++i)
            s.data[i] = base + float(i % 7);
        return s;
    };
    auto xm = make(1.0f);
    xm.kind = dsp::SpectrogramKind::Movement;
    auto xb = make(10.0f);
    xb.kind = dsp::SpectrogramKind::Breathing;
    auto xd = make(0.0f);
    xd.kind = dsp::SpectrogramKind::Doppler;
    std::fill(xd.data.begin(), xd.data.end(), 5.0f);  // degenerate channel

    const auto c = dsp::concat_channels(xm, xb, xd, true);
    CHECK(c.normalized);
    for (int ch = 0; ch < 2; ++ch) {
        double mean = 0, sq = 0;
        for (float v : c.channels[std::size_t(ch)].data) {
            mean += v;
            sq += double(v) * v;
        }
        mean /= 200;
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-5));
        CHECK(std::sqrt(sq / 200 - mean * mean) == doctest::Approx(1.0).epsilon(1e-4));
    }
    // constant channel collapses to zeros rather than dividing by ~0
    for (float v : c.channels[2].data) CHECK(v == 0.0f);
    CHECK(c.norms[2].stddev == 0.0);
}

TEST_CASE("spectrogram file roundtrip") {
    dsp::ThreeChannelSpectrogram s;
    for (int ch = 0; ch < 3; ++ch) {
        auto& c = s.channels[std::size_t(ch)];
        c.kind = dsp::SpectrogramKind(ch);
        c.n_range_bins = 3;
        c.n_frames = 5;
        c.frame_rate_hz = 1.0;
        c.bin_spacing_m = 0.05;
        c.data.resize(15);
        for (std::size_t i = 0; i < 15; ++i) c.data[i] = float(ch * 100) + float(i) * 0.25f;
    }
    s.normalized = false;
    const auto path = std::filesystem::temp_directory_path() / "rosa_test_rt.spec";
    dsp::save_spectrogram(s, path);
    const auto r = dsp::load_spectrogram(path);
    CHECK(r.n_range_bins() == 3);
    CHECK(r.n_frames() == 5);
    CHECK_FALSE(r.normalized);
    for (int ch = 0; ch < 3; ++ch) {
        CHECK(r.channels[std::size_t(ch)].kind == s.channels[std::size_t(ch)].kind);
        CHECK(r.channels[std::size_t(ch)].data == s.channels[std::size_t(ch)].data);
    }
    std::filesystem::remove(path);
}
