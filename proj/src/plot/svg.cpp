#include "rosa/plot/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rosa::plot {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write figure: " + file.string());
    return out;
}

void svg_open(std::ostream& out, int w, int h) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
}

std::string color_ramp(double v) {
    // compact viridis-ish ramp, v in [0, 1]
    v = std::clamp(v, 0.0, 1.0);
    const double r = std::clamp(255.0 * (1.05 * v * v - 0.1 * v + 0.05), 0.0, 255.0);
    const double g = std::clamp(255.0 * (1.25 * v - 0.25 * v * v), 0.0, 255.0);
    const double b = std::clamp(255.0 * (0.35 + 0.6 * std::sin(3.1 * v + 0.6)), 0.0, 255.0);
    std::ostringstream os;
    os << "rgb(" << int(r) << ',' << int(g) << ',' << int(b) << ')';
    return os.str();
}

double percentile(std::vector<float> v, double q) {
    if (v.empty()) return 0;
    const std::size_t k = std::size_t(q * double(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(k), v.end());
    return double(v[k]);
}

}  // namespace

void save_spectrogram_heatmap(const dsp::Spectrogram& s, const std::filesystem::path& file,
                              int max_cols) {
    if (s.n_range_bins <= 0 || s.n_frames <= 0) throw DataError("heatmap: empty spectrogram");
    const int decim = std::max(1, (s.n_frames + max_cols - 1) / max_cols);
    const int cols = (s.n_frames + decim - 1) / decim;
    const int cell = 4;
    auto out = open_out(file);
    svg_open(out, cols * cell, s.n_range_bins * cell);
    const double lo = percentile(s.data, 0.01);
    const double hi = std::max(percentile(s.data, 0.99), lo + 1e-12);
    for (int r = 0; r < s.n_range_bins; ++r) {
        for (int c = 0; c < cols; ++c) {
            double acc = 0;
            int n = 0;
            for (int k = c * decim; k < std::min((c + 1) * decim, s.n_frames); ++k, ++n)
                acc += double(s.at(r, k));
            const double v = (acc / std::max(n, 1) - lo) / (hi - lo);
            out << "<rect x=\"" << c * cell << "\" y=\"" << (s.n_range_bins - 1 - r) * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
                << color_ramp(v) << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

void save_event_timeline(double duration_s, const std::vector<EventAnnotation>& truth,
                         const std::vector<DetectedSegment>& detections,
                         const std::filesystem::path& file) {
    if (duration_s <= 0) throw DataError("timeline: non-positive duration");
    const int w = 1200, h = 120;
    const double sx = w / duration_s;
    auto out = open_out(file);
    svg_open(out, w, h);
    out << "<line x1=\"0\" y1=\"60\" x2=\"" << w << "\" y2=\"60\" stroke=\"#888\"/>\n";
    for (const auto& e : truth)
        out << "<rect class=\"truth\" x=\"" << e.t_start_s * sx << "\" y=\"20\" width=\""
            << (e.t_end_s - e.t_start_s) * sx << "\" height=\"30\" fill=\"#3a6ea5\"/>\n";
    for (const auto& d : detections)
        out << "<rect class=\"detection\" x=\"" << d.t_start_s * sx << "\" y=\"70\" width=\""
            << (d.t_end_s - d.t_start_s) * sx << "\" height=\"30\" fill=\"#c1553b\" opacity=\""
            << std::clamp(0.25 + 0.75 * d.score, 0.0, 1.0) << "\"/>\n";
    out << "</svg>\n";
}

void save_scatter(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& x_label, const std::string& y_label,
                  const std::filesystem::path& file) {
    if (x.size() != y.size()) throw DataError("scatter: length mismatch");
    const int w = 480, h = 480, m = 48;
    double hi = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) hi = std::max({hi, x[i], y[i]});
    hi *= 1.05;
    const double sx = (w - 2 * m) / hi, sy = (h - 2 * m) / hi;
    auto out = open_out(file);
    svg_open(out, w, h);
    out << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << m
        << "\" stroke=\"#aaa\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        out << "<circle cx=\"" << m + x[i] * sx << "\" cy=\"" << h - m - y[i] * sy
            << "\" r=\"4\" fill=\"#3a6ea5\" fill-opacity=\"0.7\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">"
        << x_label << "</text>\n";
    out << "<text x=\"14\" y=\"" << h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << h / 2 << ")\">" << y_label << "</text>\n";
    out << "</svg>\n";
}

void save_bland_altman(const std::vector<double>& a, const std::vector<double>& b,
                       const std::filesystem::path& file) {
    if (a.size() != b.size() || a.size() < 2) throw DataError("bland-altman: need paired values");
    const std::size_t n = a.size();
    std::vector<double> mean(n), diff(n);
    double bias = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mean[i] = 0.5 * (a[i] + b[i]);
        diff[i] = a[i] - b[i];
        bias += diff[i];
    }
    bias /= double(n);
    double ss = 0;
    for (double d : diff) ss += (d - bias) * (d - bias);
    const double sd = std::sqrt(ss / double(n - 1));
    const double lo_lim = bias - 1.96 * sd, hi_lim = bias + 1.96 * sd;

    const int w = 520, h = 360, m = 48;
    double x_hi = 1.0;
    for (double v : mean) x_hi = std::max(x_hi, v);
    x_hi *= 1.05;
    double y_span = std::max(1.0, std::max(std::abs(lo_lim), std::abs(hi_lim)) * 1.3);
    for (double d : diff) y_span = std::max(y_span, std::abs(d) * 1.1);
    const double sx = (w - 2 * m) / x_hi;
    const double sy = (h - 2 * m) / (2 * y_span);
    const auto ypix = [&](double v) { return h / 2.0 - v * sy; };
    auto out = open_out(file);
    svg_open(out, w, h);
    for (double lim : {bias, lo_lim, hi_lim})
        out << "<line class=\"limit\" x1=\"" << m << "\" y1=\"" << ypix(lim) << "\" x2=\""
            << w - m << "\" y2=\"" << ypix(lim) << "\" stroke=\""
            << (lim == bias ? "#444" : "#c1553b") << "\" stroke-dasharray=\"5 4\"/>\n";
    for (std::size_t i = 0; i < n; ++i)
        out << "<circle cx=\"" << m + mean[i] * sx << "\" cy=\"" << ypix(diff[i])
            << "\" r=\"4\" fill=\"#3a6ea5\" fill-opacity=\"0.7\"/>\n";
    out << "</svg>\n";
}

}  // namespace rosa::plot
