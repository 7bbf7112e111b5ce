#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "rosa/fusion/fusion.hpp"

using namespace rosa;
using fusion::FusionParams;
using fusion::SpO2Features;

namespace {

// piecewise-constant helper; plateaus are >= 2 samples so the median-of-3
// smoothing leaves extrema intact
SpO2Trace trace_from(std::initializer_list<std::pair<float, int>> runs) {
    SpO2Trace t;
    t.sample_rate_hz = 1.0;
    for (const auto& [value, count] : runs)
        t.samples.insert(t.samples.end(), std::size_t(count), value);
    return t;
}

}  // namespace

TEST_CASE("fusion score follows the three-branch rule") {
    FusionParams p;  // alpha 0.5, beta 0.6, t1 4, t2 2
    const double score = 0.6;

    // deep drop or strong rebound: confidence increases
    CHECK(fusion::fuse_score(score, {5.0, 1.0, false}, p) == doctest::Approx(0.8));
    CHECK(fusion::fuse_score(score, {1.0, 5.0, false}, p) == doctest::Approx(0.8));
    // flat oximetry on both measures: confidence decreases
    CHECK(fusion::fuse_score(score, {1.0, 1.0, false}, p) == doctest::Approx(0.36));
    // intermediate evidence: score passes through
    CHECK(fusion::fuse_score(score, {3.0, 3.0, false}, p) == doctest::Approx(0.6));
    CHECK(fusion::fuse_score(score, {1.0, 3.0, false}, p) == doctest::Approx(0.6));

    // boundary semantics: >= t1 increases, both < t2 decreases
    CHECK(fusion::fuse_score(score, {4.0, 0.0, false}, p) == doctest::Approx(0.8));
    CHECK(fusion::fuse_score(score, {1.99, 1.99, false}, p) == doctest::Approx(0.36));
    CHECK(fusion::fuse_score(score, {2.0, 1.0, false}, p) == doctest::Approx(0.6));
}

TEST_CASE("od features find the first qualifying drop") {
    // baseline 97, drop to 92 (5 points), rebound to 96 (4 points)
    const auto t = trace_from({{97, 20}, {95, 3}, {92, 4}, {94, 3}, {96, 20}, {97, 30}});
    const auto f = fusion::extract_od_features(t, 10.0, 60.0);
    CHECK_FALSE(f.empty_window);
    CHECK(f.p_d == doctest::Approx(5.0));
    CHECK(f.p_r == doctest::Approx(5.0));  // nadir 92 back up to 97 within 60 s
}

TEST_CASE("sub-threshold drops fall back to the maximum excursion") {
    // never drops 3 points: max drop (2 points) is reported instead
    const auto t = trace_from({{97, 10}, {96, 4}, {95, 6}, {97, 40}});
    const auto f = fusion::extract_od_features(t, 0.0, 60.0);
    CHECK(f.p_d == doctest::Approx(2.0));
    CHECK(f.p_r == doctest::Approx(2.0));
}

TEST_CASE("windows beyond the trace are flagged empty") {
    const auto t = trace_from({{97, 30}});
    const auto f = fusion::extract_od_features(t, 100.0, 60.0);
    CHECK(f.empty_window);
    CHECK(f.p_d == 0.0);
}

TEST_CASE("rise is limited to the minute after the nadir") {
    // recovery happens 80 s after the nadir: too late to count
    const auto t = trace_from({{97, 10}, {92, 90}, {97, 30}});
    const auto f = fusion::extract_od_features(t, 0.0, 60.0);
    CHECK(f.p_d == doctest::Approx(5.0));
    CHECK(f.p_r == doctest::Approx(0.0));
}

TEST_CASE("fusing a session rescores and splits on the decision cut") {
    FusionParams p;
    // desaturation aligned with the first detection only
    auto t = trace_from({{97, 40}, {92, 6}, {97, 254}});
    std::vector<DetectedSegment> dets;
    dets.push_back({EventCategory::OA, 0.6, 20.0, 42.0});    // seen by oximetry
    dets.push_back({EventCategory::OA, 0.6, 200.0, 215.0});  // flat window
    const auto fused = fusion::fuse_session(dets, t, p);
    REQUIRE(fused.all.size() == 2);
    CHECK(fused.all[0].score == doctest::Approx(0.8));
    CHECK(fused.all[1].score == doctest::Approx(0.36));
    REQUIRE(fused.accepted.size() == 1);
    CHECK(fused.accepted[0].t_start_s == 20.0);
}

TEST_CASE("parameter validation and io") {
    FusionParams p;
    p.t1 = 1.0;
    p.t2 = 2.0;  // t2 must stay below t1
    CHECK_THROWS_AS(p.validate(), DataError);

    FusionParams q;
    q.t1 = 5.5;
    q.t2 = 1.5;
    const auto path = std::filesystem::temp_directory_path() / "rosa_test_fusion.json";
    fusion::save_fusion_params(q, path);
    const auto r = fusion::load_fusion_params(path);
    CHECK(r.t1 == 5.5);
    CHECK(r.t2 == 1.5);
    CHECK(r.alpha == 0.5);
    std::filesystem::remove(path);
}

TEST_CASE("grid search prefers thresholds separating events from noise") {
    // two subjects whose radar scores are uninformative (all 0.6): only
    // the oximetry split can recover the AHI ordering
    std::vector<fusion::GridSearchInput> inputs;
    for (int subject = 0; subject < 4; ++subject) {
        fusion::GridSearchInput in;
        in.tst_h = 1.0;
        in.true_ahi = double(2 + subject * 8);
        SpO2Trace t;
        t.sample_rate_hz = 1.0;
        t.samples.assign(3600, 97.0f);
        // true events desaturate by 5 points for 10 s, spaced 120 s apart
        for (int e = 0; e < int(in.true_ahi); ++e) {
            const int at = 100 + e * 120;
            for (int k = 0; k < 10; ++k) t.samples[std::size_t(at + k)] = 92.0f;
            in.detections.push_back(
                {EventCategory::OA, 0.6, double(at - 15), double(at + 5)});
        }
        // plus a fixed batch of false positives on flat oximetry
        for (int f = 0; f < 12; ++f)
            in.detections.push_back(
                {EventCategory::OA, 0.6, 40.0 + f * 280.0, 55.0 + f * 280.0});
        in.spo2 = t;
        inputs.push_back(std::move(in));
    }
    const auto best = fusion::grid_search_thresholds(inputs, fusion::default_t1_grid(),
                                                    fusion::default_t2_grid());
    // thresholds must bracket the 5-point desaturations: boost real
    // events (t1 <= 5) and suppress the flat windows (t2 > 0)
    CHECK(best.t1 <= 5.0);
    CHECK(best.t2 >= 0.5);
    CHECK(best.t2 < best.t1);
}
