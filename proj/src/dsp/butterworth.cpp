#include "rosa/dsp/butterworth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rosa::dsp {

namespace {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

// analog Butterworth low-pass prototype poles, unit cutoff, left half-plane
std::vector<cplx> prototype_poles(int order) {
    std::vector<cplx> p;
    for (int k = 0; k < order; ++k) {
        const double theta = pi * (2.0 * k + order + 1.0) / (2.0 * order);
        p.emplace_back(std::cos(theta), std::sin(theta));
    }
    return p;
}

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

// Pair complex-conjugate digital poles into biquads with the given
// repeated real zero pattern (z1, z2) per section.
std::vector<Biquad> to_sections(std::vector<cplx> poles, double zero1, double zero2) {
    // sort so conjugate partners are adjacent
    std::sort(poles.begin(), poles.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return std::abs(a.imag()) < std::abs(b.imag());
    });
    std::vector<Biquad> out;
    std::vector<cplx> reals;
    for (std::size_t i = 0; i < poles.size();) {
        if (std::abs(poles[i].imag()) < 1e-12) {
            reals.push_back(poles[i]);
            ++i;
            continue;
        }
        // conjugate pair
        const cplx p = poles[i];
        Biquad s;
        s.a1 = -2.0 * p.real();
        s.a2 = std::norm(p);
        s.b0 = 1.0;
        s.b1 = -(zero1 + zero2);
        s.b2 = zero1 * zero2;
        out.push_back(s);
        i += 2;
    }
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
        Biquad s;
        s.a1 = -(reals[i].real() + reals[i + 1].real());
        s.a2 = reals[i].real() * reals[i + 1].real();
        s.b0 = 1.0;
        s.b1 = -(zero1 + zero2);
        s.b2 = zero1 * zero2;
        out.push_back(s);
    }
    if (reals.size() % 2 != 0) {
        Biquad s;  // first-order remainder, second coefficients zero
        s.a1 = -reals.back().real();
        s.b0 = 1.0;
        s.b1 = -zero1;
        out.push_back(s);
    }
    return out;
}

void normalize_gain(SosFilter& f, double ref_hz) {
    const double g = f.gain_at(ref_hz);
    if (!(g > 0)) throw NumericError("filter design: zero gain at reference frequency");
    f.sections.front().b0 /= g;
    f.sections.front().b1 /= g;
    f.sections.front().b2 /= g;
}

struct BiquadState {
    double z1 = 0, z2 = 0;
};

inline double step(const Biquad& s, BiquadState& st, double x) {
    const double y = s.b0 * x + st.z1;
    st.z1 = s.b1 * x - s.a1 * y + st.z2;
    st.z2 = s.b2 * x - s.a2 * y;
    return y;
}

// steady-state section state for a constant input x0
BiquadState steady_state(const Biquad& s, double x0) {
    const double h1 = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double yss = h1 * x0;
    BiquadState st;
    st.z2 = s.b2 * x0 - s.a2 * yss;
    st.z1 = yss - s.b0 * x0;
    return st;
}

void sos_filter_inplace(const SosFilter& f, std::vector<double>& x) {
    for (const auto& s : f.sections) {
        BiquadState st = steady_state(s, x.empty() ? 0.0 : x.front());
        for (double& v : x) v = step(s, st, v);
    }
}

}  // namespace

std::complex<double> SosFilter::response(double f_hz) const {
    const double w = 2.0 * pi * f_hz / sample_rate_hz;
    const cplx z1 = std::polar(1.0, -w);
    const cplx z2 = z1 * z1;
    cplx h(1.0);
    for (const auto& s : sections)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
}

SosFilter design_highpass(int order, double cutoff_hz, double fs) {
    if (order < 1) throw DataError("filter order must be >= 1");
    if (!(cutoff_hz > 0) || !(cutoff_hz < fs / 2))
        throw DataError("high-pass cutoff must lie in (0, nyquist)");
    const double wc = 2.0 * fs * std::tan(pi * cutoff_hz / fs);  // prewarped

    std::vector<cplx> dpoles;
    for (cplx p : prototype_poles(order)) dpoles.push_back(bilinear(wc / p, fs));

    SosFilter f;
    f.sample_rate_hz = fs;
    f.sections = to_sections(std::move(dpoles), 1.0, 1.0);  // zeros at z = 1
    normalize_gain(f, fs / 2);
    return f;
}

SosFilter design_bandpass(int order, double low_hz, double high_hz, double fs) {
    if (order < 1) throw DataError("filter order must be >= 1");
    if (!(0 < low_hz && low_hz < high_hz && high_hz < fs / 2))
        throw DataError("band edges must satisfy 0 < low < high < nyquist");
    const double w1 = 2.0 * fs * std::tan(pi * low_hz / fs);
    const double w2 = 2.0 * fs * std::tan(pi * high_hz / fs);
    const double w0sq = w1 * w2;
    const double bw = w2 - w1;

    // LP->BP: s -> (s^2 + w0^2) / (bw * s); each prototype pole splits in two
    std::vector<cplx> dpoles;
    for (cplx p : prototype_poles(order)) {
        const cplx pb = p * bw * 0.5;
        const cplx d = std::sqrt(pb * pb - w0sq);
        dpoles.push_back(bilinear(pb + d, fs));
        dpoles.push_back(bilinear(pb - d, fs));
    }

    SosFilter f;
    f.sample_rate_hz = fs;
    f.sections = to_sections(std::move(dpoles), 1.0, -1.0);  // zeros at z = +-1
    normalize_gain(f, std::sqrt(low_hz * high_hz));
    return f;
}

std::vector<double> filtfilt(const SosFilter& f, std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t pad = std::min<std::size_t>(n - 1, 600);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i)  // odd reflection about the first sample
        ext.push_back(2.0 * x[0] - x[pad - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < pad; ++i)
        ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

    sos_filter_inplace(f, ext);
    std::reverse(ext.begin(), ext.end());
    sos_filter_inplace(f, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + pad, ext.begin() + pad + n);
}

void filtfilt_complex(const SosFilter& f, std::span<std::complex<float>> x) {
    std::vector<double> part(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) part[i] = x[i].real();
    auto re = filtfilt(f, part);
    for (std::size_t i = 0; i < x.size(); ++i) part[i] = x[i].imag();
    auto im = filtfilt(f, part);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::complex<float>(float(re[i]), float(im[i]));
}

}  // namespace rosa::dsp
