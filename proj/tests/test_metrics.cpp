#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "rosa/metrics/metrics.hpp"

using namespace rosa;

namespace {

DetectedSegment det(double t0, double t1, double score, EventCategory c = EventCategory::OA) {
    return {c, score, t0, t1};
}

EventAnnotation gt(double t0, double t1, EventCategory c = EventCategory::OA) {
    return {c, t0, t1};
}

}  // namespace

TEST_CASE("interval iou") {
    CHECK(metrics::iou_1d(0, 10, 0, 10) == doctest::Approx(1.0));
    CHECK(metrics::iou_1d(0, 10, 20, 30) == doctest::Approx(0.0));
    CHECK(metrics::iou_1d(0, 10, 5, 15) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("average precision on a pinned example") {
    // two gts; three detections ranked 0.9 (hit), 0.8 (miss), 0.7 (hit).
    // precision envelope: 1 at recall 0.5, 2/3 at recall 1 -> AP = 5/6
    const std::vector<EventAnnotation> gts{gt(0, 20), gt(100, 120)};
    std::vector<DetectedSegment> dets{det(1, 21, 0.9), det(50, 70, 0.8), det(99, 119, 0.7)};
    const auto ap = metrics::average_precision(dets, gts, 0.5, true);
    REQUIRE(ap.has_value());
    CHECK(*ap == doctest::Approx(5.0 / 6.0));

    // perfect ranking gives AP 1 regardless of extra low-scored misses
    std::vector<DetectedSegment> good{det(0, 20, 0.9), det(100, 120, 0.8), det(300, 330, 0.1)};
    CHECK(*metrics::average_precision(good, gts, 0.5, true) == doctest::Approx(1.0));

    // no ground truth: undefined, not zero
    CHECK_FALSE(metrics::average_precision(dets, {}, 0.5, true).has_value());
}

namespace {

// independent oracle: explicit PR curve with right-to-left precision
// interpolation, quadratic matching
double ap_oracle(std::vector<DetectedSegment> dets, std::vector<EventAnnotation> gts,
                 double thr) {
    std::stable_sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.t_start_s < b.t_start_s;
    });
    std::vector<bool> used(gts.size(), false);
    std::vector<int> is_tp;
    for (const auto& d : dets) {
        int best = -1;
        double best_iou = thr;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (used[g]) continue;
            const double v =
                metrics::iou_1d(d.t_start_s, d.t_end_s, gts[g].t_start_s, gts[g].t_end_s);
            if (v >= best_iou && (best < 0 || v > best_iou)) {
                best = int(g);
                best_iou = v;
            }
        }
        if (best >= 0) {
            used[std::size_t(best)] = true;
            is_tp.push_back(1);
        } else {
            is_tp.push_back(0);
        }
    }
    std::vector<double> prec, rec;
    int tp = 0, fp = 0;
    for (int v : is_tp) {
        tp += v;
        fp += 1 - v;
        prec.push_back(double(tp) / double(tp + fp));
        rec.push_back(double(tp) / double(gts.size()));
    }
    for (int i = int(prec.size()) - 2; i >= 0; --i)
        prec[std::size_t(i)] = std::max(prec[std::size_t(i)], prec[std::size_t(i) + 1]);
    double ap = 0, last_r = 0;
    for (std::size_t i = 0; i < prec.size(); ++i) {
        ap += (rec[i] - last_r) * prec[i];
        last_r = rec[i];
    }
    return ap;
}

}  // namespace

TEST_CASE("average precision agrees with the quadratic oracle") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<EventAnnotation> gts;
        const int n_gt = 1 + int(rng() % 8);
        for (int g = 0; g < n_gt; ++g) {
            const double t0 = double(g) * 100.0 + u(rng) * 20.0;
            gts.push_back(gt(t0, t0 + 15.0 + u(rng) * 30.0));
        }
        std::vector<DetectedSegment> dets;
        const int n_det = int(rng() % 14);
        for (int d = 0; d < n_det; ++d) {
            const double t0 = u(rng) * double(n_gt) * 100.0;
            dets.push_back(det(t0, t0 + 10.0 + u(rng) * 40.0,
                               std::round(u(rng) * 10.0) / 10.0));
        }
        const auto ap = metrics::average_precision(dets, gts, 0.5, true);
        REQUIRE(ap.has_value());
        CHECK(*ap == doctest::Approx(ap_oracle(dets, gts, 0.5)).epsilon(1e-12));
    }
}

TEST_CASE("ahi counts every category over tst") {
    std::vector<EventAnnotation> events{gt(0, 15, EventCategory::CA),
                                        gt(100, 115, EventCategory::OA),
                                        gt(200, 215, EventCategory::MA),
                                        gt(300, 315, EventCategory::H)};
    CHECK(metrics::compute_ahi(events, 2.0) == doctest::Approx(2.0));
    CHECK(metrics::compute_ahi(std::size_t(30), 0.5) == doctest::Approx(60.0));
}

TEST_CASE("icc(2,1) matches a hand-solved table") {
    // pairs (1,2), (3,4), (5,6): constant offset of 1.
    // MSR = 8, MSC = 1.5, MSE = 0, n = 3, k = 2:
    // icc = (8 - 0) / (8 + (2/3)(1.5 - 0)) = 8/9
    const auto icc = metrics::icc21({{1, 2}, {3, 4}, {5, 6}});
    REQUIRE(icc.has_value());
    CHECK(*icc == doctest::Approx(8.0 / 9.0).epsilon(1e-12));

    // perfect agreement
    CHECK(*metrics::icc21({{1, 1}, {5, 5}, {9, 9}}) == doctest::Approx(1.0));
    // no between-subject variance: undefined
    CHECK_FALSE(metrics::icc21({{2, 2}, {2, 2}, {2, 2}}).has_value());
}

TEST_CASE("cohen kappa from a pinned confusion table") {
    // tp 40, tn 40, fp 10, fn 10: po = 0.8, pe = 0.5, kappa = 0.6
    const auto d = metrics::diagnostic_from_counts(40, 40, 10, 10);
    REQUIRE(d.kappa.has_value());
    CHECK(*d.kappa == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(*d.sensitivity == doctest::Approx(0.8));
    CHECK(*d.specificity == doctest::Approx(0.8));
    CHECK(d.accuracy == doctest::Approx(0.8));

    // degenerate marginals with perfect agreement
    const auto p = metrics::diagnostic_from_counts(10, 0, 0, 0);
    CHECK(*p.kappa == doctest::Approx(1.0));
}

TEST_CASE("threshold metrics binarize ahi pairs") {
    // (true, est): over/under threshold 15
    const std::vector<std::pair<double, double>> pairs{
        {20, 25}, {30, 10}, {5, 3}, {8, 20}};
    const auto d = metrics::diagnostic_metrics(pairs, 15.0);
    CHECK(*d.sensitivity == doctest::Approx(0.5));
    CHECK(*d.specificity == doctest::Approx(0.5));
    CHECK(d.accuracy == doctest::Approx(0.5));
}

TEST_CASE("odi3 on a hand-constructed trace") {
    // 30-minute trace with exactly one qualifying desaturation: at a tst
    // of 0.5 h that is 2.0 events per hour
    SpO2Trace t;
    t.sample_rate_hz = 1.0;
    t.samples.assign(1800, 97.0f);
    for (int i = 600; i < 640; ++i) t.samples[std::size_t(i)] = 93.0f;  // -4 points
    for (int i = 900; i < 940; ++i) t.samples[std::size_t(i)] = 95.5f;  // -1.5: no event
    CHECK(metrics::odi3(t, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("odi3 counts repeated desaturations separately") {
    SpO2Trace t;
    t.sample_rate_hz = 1.0;
    t.samples.assign(3600, 96.0f);
    for (int e = 0; e < 5; ++e)
        for (int i = 0; i < 30; ++i) t.samples[std::size_t(300 + e * 600 + i)] = 92.0f;
    CHECK(metrics::odi3(t, 1.0) == doctest::Approx(5.0));
}

TEST_CASE("bland altman limits use the n-1 deviation") {
    const std::vector<std::pair<double, double>> pairs{{10, 12}, {20, 19}, {30, 33}, {40, 38}};
    // diffs: -2, 1, -3, 2 -> bias -0.5, sd = sqrt(sum((d+0.5)^2)/3)
    const auto ba = metrics::bland_altman(pairs);
    CHECK(ba.bias == doctest::Approx(-0.5));
    const double sd = std::sqrt(((-1.5) * (-1.5) + 1.5 * 1.5 + (-2.5) * (-2.5) + 2.5 * 2.5) / 3.0);
    CHECK(ba.loa_upper == doctest::Approx(-0.5 + 1.96 * sd));
    CHECK(ba.loa_lower == doctest::Approx(-0.5 - 1.96 * sd));
}

TEST_CASE("method evaluation pools sessions with separated time axes") {
    std::vector<metrics::SessionEval> sessions(2);
    for (int s = 0; s < 2; ++s) {
        auto& ev = sessions[std::size_t(s)];
        ev.tst_h = 1.0;
        ev.ground_truth = {gt(100, 130), gt(500, 520)};
        ev.detections = {det(101, 131, 0.9), det(499, 521, 0.8), det(900, 930, 0.3)};
        ev.spo2.sample_rate_hz = 1.0;
        ev.spo2.samples.assign(3600, 97.0f);
    }
    const auto r = metrics::evaluate_method("radar", sessions, 0.5);
    CHECK(r.method == "radar");
    REQUIRE(r.ap50.has_value());
    CHECK(*r.ap50 == doctest::Approx(1.0));  // the 0.3 misses rank last
    REQUIRE(r.ahi_pairs.size() == 2);
    CHECK(r.ahi_pairs[0].first == doctest::Approx(2.0));
    CHECK(r.ahi_pairs[0].second == doctest::Approx(2.0));  // 0.3 under the cut
    CHECK(r.diagnostics.count(5) == 1);
    CHECK(r.diagnostics.count(15) == 1);
    CHECK(r.diagnostics.count(30) == 1);
}

TEST_CASE("report files include one row per method") {
    metrics::AgreementReport rep;
    metrics::MethodReport m;
    m.method = "odi3";
    m.icc = 0.42;
    rep.methods.push_back(m);
    m.method = "radar";
    m.ap50 = 0.7;
    rep.methods.push_back(m);
    const auto dir = std::filesystem::temp_directory_path();
    metrics::save_report_json(rep, dir / "rosa_test_report.json", 0.5);
    metrics::save_report_csv(rep, dir / "rosa_test_report.csv");
    std::ifstream csv(dir / "rosa_test_report.csv");
    std::string all((std::istreambuf_iterator<char>(csv)), std::istreambuf_iterator<char>());
    CHECK(all.find("odi3") != std::string::npos);
    CHECK(all.find("radar") != std::string::npos);
    CHECK(all.find("/") != std::string::npos);  // missing ap rendered as "/"
    std::filesystem::remove(dir / "rosa_test_report.json");
    std::filesystem::remove(dir / "rosa_test_report.csv");
}
