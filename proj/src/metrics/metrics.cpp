#include "rosa/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

namespace rosa::metrics {

using nlohmann::json;

double iou_1d(double a_start, double a_end, double b_start, double b_end) {
    const double inter =
        std::max(0.0, std::min(a_end, b_end) - std::max(a_start, b_start));
    const double uni = (a_end - a_start) + (b_end - b_start) - inter;
    return uni > 0 ? inter / uni : 0.0;
}

namespace {

// PR-curve AP for one class pool; gt_used is sized to ground_truth
double ap_single(std::vector<DetectedSegment> dets,
                 const std::vector<EventAnnotation>& gts, double iou_threshold) {
    std::stable_sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.t_start_s < b.t_start_s;
    });

    std::vector<bool> used(gts.size(), false);
    std::vector<int> is_tp(dets.size(), 0);
    for (std::size_t d = 0; d < dets.size(); ++d) {
        double best = 0;
        std::size_t best_g = gts.size();
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (used[g]) continue;
            const double v = iou_1d(dets[d].t_start_s, dets[d].t_end_s, gts[g].t_start_s,
                                    gts[g].t_end_s);
            if (v >= iou_threshold && v > best) {
                best = v;
                best_g = g;
            }
        }
        if (best_g < gts.size()) {
            used[best_g] = true;
            is_tp[d] = 1;
        }
    }

    // all-point interpolation: area under the exact PR staircase with the
    // precision envelope taken from the right
    const double n_gt = double(gts.size());
    std::vector<double> precision(dets.size()), recall(dets.size());
    int tp = 0;
    for (std::size_t d = 0; d < dets.size(); ++d) {
        tp += is_tp[d];
        precision[d] = double(tp) / double(d + 1);
        recall[d] = double(tp) / n_gt;
    }
    for (std::size_t d = precision.size(); d-- > 1;)
        precision[d - 1] = std::max(precision[d - 1], precision[d]);

    double ap = 0, prev_recall = 0;
    for (std::size_t d = 0; d < dets.size(); ++d) {
        ap += (recall[d] - prev_recall) * precision[d];
        prev_recall = recall[d];
    }
    return ap;
}

}  // namespace

std::optional<double> average_precision(const std::vector<DetectedSegment>& detections,
                                        const std::vector<EventAnnotation>& ground_truth,
                                        double iou_threshold, bool class_agnostic) {
    if (ground_truth.empty()) return std::nullopt;
    if (class_agnostic) return ap_single(detections, ground_truth, iou_threshold);

    double sum = 0;
    int n_classes = 0;
    for (int c = 0; c < 4; ++c) {
        std::vector<EventAnnotation> gts;
        for (const auto& g : ground_truth)
            if (int(g.category) == c) gts.push_back(g);
        if (gts.empty()) continue;
        std::vector<DetectedSegment> dets;
        for (const auto& d : detections)
            if (int(d.category) == c) dets.push_back(d);
        sum += ap_single(dets, gts, iou_threshold);
        ++n_classes;
    }
    if (n_classes == 0) return std::nullopt;
    return sum / n_classes;
}

double compute_ahi(std::size_t n_events, double tst_h) {
    if (!(tst_h > 0)) throw DataError("compute_ahi: tst must be positive");
    return double(n_events) / tst_h;
}

double compute_ahi(const std::vector<EventAnnotation>& events, double tst_h) {
    return compute_ahi(events.size(), tst_h);  // all four categories count
}

double compute_ahi(const std::vector<DetectedSegment>& detections, double tst_h) {
    return compute_ahi(detections.size(), tst_h);
}

std::optional<double> icc21(const std::vector<std::pair<double, double>>& pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) throw DataError("icc: need at least two pairs");
    constexpr double k = 2.0;

    double grand = 0;
    for (const auto& [a, b] : pairs) grand += a + b;
    grand /= double(n) * k;

    double rater_mean_a = 0, rater_mean_b = 0;
    for (const auto& [a, b] : pairs) {
        rater_mean_a += a;
        rater_mean_b += b;
    }
    rater_mean_a /= double(n);
    rater_mean_b /= double(n);

    double ss_rows = 0, ss_cols = 0, ss_total = 0;
    for (const auto& [a, b] : pairs) {
        const double row_mean = (a + b) / 2.0;
        ss_rows += k * (row_mean - grand) * (row_mean - grand);
        ss_total += (a - grand) * (a - grand) + (b - grand) * (b - grand);
    }
    ss_cols = double(n) * ((rater_mean_a - grand) * (rater_mean_a - grand) +
                           (rater_mean_b - grand) * (rater_mean_b - grand));
    const double ss_err = ss_total - ss_rows - ss_cols;

    const double msr = ss_rows / double(n - 1);
    const double msc = ss_cols / (k - 1);
    const double mse = ss_err / (double(n - 1) * (k - 1));

    const double denom = msr + (k - 1) * mse + (k / double(n)) * (msc - mse);
    if (std::abs(denom) < 1e-12) return std::nullopt;  // no between-subject variance
    return (msr - mse) / denom;
}

double odi3(const SpO2Trace& s, double tst_h) {
    if (!(tst_h > 0)) throw DataError("odi3: tst must be positive");
    // median-of-3 smoothing, same convention as the fusion feature scan
    const auto& x = s.samples;
    if (x.size() < 3) return 0;
    std::vector<float> m(x.size());
    m.front() = x.front();
    m.back() = x.back();
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        float a = x[i - 1], b = x[i], c = x[i + 1];
        m[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
    }

    int count = 0;
    std::size_t i = 0;
    while (i + 1 < m.size()) {
        while (i + 1 < m.size() && m[i + 1] >= m[i]) ++i;  // climb to a local max
        const double peak = m[i];
        std::size_t j = i;
        while (j + 1 < m.size() && m[j + 1] <= m[j]) ++j;  // descend to the nadir
        if (j == i) break;                                 // flat tail
        const double nadir = m[j];
        if (peak - nadir >= 3.0) {
            // event ends once the trace recovers >= 1 point from nadir
            while (j + 1 < m.size() && m[j] - nadir < 1.0) ++j;
            ++count;
        }
        i = j;
    }
    return double(count) / tst_h;
}

DiagnosticMetrics diagnostic_from_counts(int tp, int tn, int fp, int fn) {
    DiagnosticMetrics d;
    const int n = tp + tn + fp + fn;
    if (n == 0) throw DataError("diagnostic metrics: empty input");
    if (tp + fn > 0) d.sensitivity = double(tp) / double(tp + fn);
    if (tn + fp > 0) d.specificity = double(tn) / double(tn + fp);
    d.accuracy = double(tp + tn) / double(n);

    const double po = d.accuracy;
    const double p_yes = double(tp + fn) / n * double(tp + fp) / n;
    const double p_no = double(tn + fp) / n * double(tn + fn) / n;
    const double pe = p_yes + p_no;
    if (std::abs(1.0 - pe) > 1e-12)
        d.kappa = (po - pe) / (1.0 - pe);
    else if (po >= 1.0 - 1e-12)
        d.kappa = 1.0;  // perfect agreement with degenerate marginals
    return d;
}

DiagnosticMetrics diagnostic_metrics(const std::vector<std::pair<double, double>>& ahi_pairs,
                                     double threshold) {
    if (ahi_pairs.empty()) throw DataError("diagnostic metrics: need at least one pair");
    int tp = 0, tn = 0, fp = 0, fn = 0;
    for (const auto& [truth, est] : ahi_pairs) {
        const bool t = truth >= threshold, e = est >= threshold;
        if (t && e) ++tp;
        else if (!t && !e) ++tn;
        else if (!t && e) ++fp;
        else ++fn;
    }
    return diagnostic_from_counts(tp, tn, fp, fn);
}

BlandAltman bland_altman(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw DataError("bland_altman: need at least two pairs");
    std::vector<double> diffs;
    for (const auto& [truth, est] : pairs) diffs.push_back(truth - est);
    const double bias = std::accumulate(diffs.begin(), diffs.end(), 0.0) / diffs.size();
    double ss = 0;
    for (double d : diffs) ss += (d - bias) * (d - bias);
    const double sd = std::sqrt(ss / double(diffs.size() - 1));
    return {bias, bias - 1.96 * sd, bias + 1.96 * sd};
}

MethodReport evaluate_method(const std::string& name, const std::vector<SessionEval>& sessions,
                             double decision_threshold) {
    MethodReport r;
    r.method = name;

    // pooled PR curve over the cohort; session index offsets keep greedy
    // matching within each session
    std::vector<DetectedSegment> pooled_dets;
    std::vector<EventAnnotation> pooled_gts;
    double offset = 0;
    for (const auto& s : sessions) {
        for (auto d : s.detections) {
            d.t_start_s += offset;
            d.t_end_s += offset;
            pooled_dets.push_back(d);
        }
        for (auto g : s.ground_truth) {
            g.t_start_s += offset;
            g.t_end_s += offset;
            pooled_gts.push_back(g);
        }
        offset += s.tst_h * 3600.0 + 3600.0;
    }
    r.ap50 = average_precision(pooled_dets, pooled_gts, 0.5, true);
    r.ap50_per_class = average_precision(pooled_dets, pooled_gts, 0.5, false);

    for (const auto& s : sessions) {
        std::size_t counted = 0;
        for (const auto& d : s.detections)
            if (d.score >= decision_threshold) ++counted;
        r.ahi_pairs.emplace_back(compute_ahi(s.ground_truth, s.tst_h),
                                 compute_ahi(counted, s.tst_h));
    }
    if (r.ahi_pairs.size() >= 2) {
        r.icc = icc21(r.ahi_pairs);
        r.ba = bland_altman(r.ahi_pairs);
    }
    for (int thr : {5, 15, 30}) r.diagnostics[thr] = diagnostic_metrics(r.ahi_pairs, thr);
    return r;
}

MethodReport evaluate_odi3(const std::vector<SessionEval>& sessions) {
    MethodReport r;
    r.method = "odi3";
    for (const auto& s : sessions)
        r.ahi_pairs.emplace_back(compute_ahi(s.ground_truth, s.tst_h), odi3(s.spo2, s.tst_h));
    if (r.ahi_pairs.size() >= 2) {
        r.icc = icc21(r.ahi_pairs);
        r.ba = bland_altman(r.ahi_pairs);
    }
    for (int thr : {5, 15, 30}) r.diagnostics[thr] = diagnostic_metrics(r.ahi_pairs, thr);
    return r;
}

namespace {

json opt_to_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

json method_to_json(const MethodReport& m) {
    json j{{"method", m.method},
           {"ap50", opt_to_json(m.ap50)},
           {"ap50_per_class", opt_to_json(m.ap50_per_class)},
           {"icc", opt_to_json(m.icc)},
           {"ahi_pairs", json::array()},
           {"diagnostics", json::object()},
           {"bland_altman", {{"bias", m.ba.bias},
                             {"loa_lower", m.ba.loa_lower},
                             {"loa_upper", m.ba.loa_upper}}}};
    for (const auto& [t, e] : m.ahi_pairs)
        j["ahi_pairs"].push_back(json{{"true_ahi", t}, {"estimated_ahi", e}});
    for (const auto& [thr, d] : m.diagnostics)
        j["diagnostics"][std::to_string(thr)] = json{{"sensitivity", opt_to_json(d.sensitivity)},
                                                     {"specificity", opt_to_json(d.specificity)},
                                                     {"accuracy", d.accuracy},
                                                     {"kappa", opt_to_json(d.kappa)}};
    return j;
}

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "/";
    std::ostringstream o;
    o.precision(4);
    o << std::fixed << *v;
    return o.str();
}

}  // namespace

void save_report_json(const AgreementReport& r, const std::filesystem::path& file,
                      double decision_threshold) {
    json j{{"decision_threshold", decision_threshold}, {"methods", json::array()}};
    for (const auto& m : r.methods) j["methods"].push_back(method_to_json(m));
    std::ofstream f(file);
    if (!f) throw DataError("cannot open for write: " + file.string());
    f << j.dump(2) << "\n";
}

void save_report_csv(const AgreementReport& r, const std::filesystem::path& file) {
    std::ofstream f(file);
    if (!f) throw DataError("cannot open for write: " + file.string());
    f << "method,ap50,icc,threshold,sensitivity,specificity,accuracy,kappa\n";
    for (const auto& m : r.methods) {
        if (m.diagnostics.empty()) {
            f << m.method << "," << fmt_opt(m.ap50) << "," << fmt_opt(m.icc) << ",/,/,/,/,/\n";
            continue;
        }
        for (const auto& [thr, d] : m.diagnostics) {
            f << m.method << "," << fmt_opt(m.ap50) << "," << fmt_opt(m.icc) << "," << thr << ","
              << fmt_opt(d.sensitivity) << "," << fmt_opt(d.specificity) << "," << d.accuracy
              << "," << fmt_opt(d.kappa) << "\n";
        }
    }
}

void save_pairs_csv(const std::vector<std::pair<double, double>>& pairs,
                    const std::filesystem::path& file) {
    std::ofstream f(file);
    if (!f) throw DataError("cannot open for write: " + file.string());
    f << "true_ahi,estimated_ahi\n";
    for (const auto& [t, e] : pairs) f << t << "," << e << "\n";
}

}  // namespace rosa::metrics
