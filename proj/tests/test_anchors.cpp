#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rosa/net/anchors.hpp"

using namespace rosa::net;

TEST_CASE("segment iou basics") {
    CHECK(iou_segments({0, 10}, {0, 10}) == doctest::Approx(1.0));
    CHECK(iou_segments({0, 10}, {10, 20}) == doctest::Approx(0.0));
    CHECK(iou_segments({0, 10}, {5, 15}) == doctest::Approx(5.0 / 15.0));
    CHECK(iou_segments({0, 30}, {10, 20}) == doctest::Approx(10.0 / 30.0));
}

TEST_CASE("anchor grid covers every level, step and scale") {
    const auto anchors = generate_anchors({450, 225, 112}, {4, 8, 16}, {15, 30, 60, 120});
    CHECK(anchors.size() == std::size_t(450 + 225 + 112) * 4);
    // first anchors sit at the first step of level 0, center 0.5 * stride
    CHECK(anchors[0].level == 0);
    CHECK(anchors[0].center == doctest::Approx(2.0));
    CHECK(anchors[0].length == doctest::Approx(15.0));
    CHECK(anchors[3].length == doctest::Approx(120.0));
    // step 5 of level 0: center (5 + 0.5) * 4 = 22
    CHECK(anchors[5 * 4].center == doctest::Approx(22.0));
    // level 1 starts after 450 * 4 entries, stride 8
    const auto& l1 = anchors[std::size_t(450) * 4];
    CHECK(l1.level == 1);
    CHECK(l1.center == doctest::Approx(4.0));
}

TEST_CASE("encode and decode are inverse maps") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 200.0);
    for (int i = 0; i < 200; ++i) {
        AnchorSegment a{u(rng), u(rng), 0, 0};
        const double c = u(rng), l = u(rng);
        const Segment gt{c - l / 2, c + l / 2};
        const auto d = encode_segment(gt, a);
        const auto back = decode_segment(d, a);
        CHECK(back.start == doctest::Approx(gt.start).epsilon(1e-9));
        CHECK(back.end == doctest::Approx(gt.end).epsilon(1e-9));
    }
    // the identity anchor encodes to zero deltas
    const auto d0 = encode_segment({10, 40}, AnchorSegment{25, 30, 0, 0});
    CHECK(d0.d_center == doctest::Approx(0.0));
    CHECK(d0.d_log_length == doctest::Approx(0.0));
}

TEST_CASE("matcher labels by iou with an ignore band") {
    std::vector<AnchorSegment> anchors{
        {25, 30, 0, 0},   // IoU 1.0 with the gt -> positive
        {40, 30, 0, 0},   // [25,55] vs [10,40]: inter 15, union 45 -> 1/3, ignored
        {200, 30, 0, 0},  // no overlap -> negative
    };
    const std::vector<Segment> gts{{10, 40}};
    const auto m = match_anchors(anchors, gts, 0.7, 0.3);
    REQUIRE(m.size() == 3);
    CHECK(m[0].label == 1);
    CHECK(m[0].gt_index == 0);
    CHECK(m[1].label == -1);
    CHECK(m[2].label == 0);
    CHECK(m[0].target.d_center == doctest::Approx(0.0));
}

TEST_CASE("argmax anchor is forced positive") {
    // no anchor reaches 0.7, but the best one still becomes positive
    std::vector<AnchorSegment> anchors{{25, 60, 0, 0}, {120, 60, 0, 0}};
    const std::vector<Segment> gts{{10, 40}};
    const auto m = match_anchors(anchors, gts, 0.7, 0.3);
    CHECK(m[0].label == 1);
    CHECK(m[0].gt_index == 0);
    CHECK(m[1].label == 0);
}

namespace {

// quadratic reference NMS: repeatedly take the best remaining segment and
// erase everything overlapping it
std::vector<ScoredSegment> nms_oracle(std::vector<ScoredSegment> seg, double thr,
                                      bool per_class) {
    std::vector<ScoredSegment> kept;
    std::vector<bool> dead(seg.size(), false);
    for (;;) {
        int best = -1;
        for (std::size_t i = 0; i < seg.size(); ++i) {
            if (dead[i]) continue;
            if (best < 0 || seg[i].score > seg[std::size_t(best)].score ||
                (seg[i].score == seg[std::size_t(best)].score &&
                 (seg[i].start < seg[std::size_t(best)].start ||
                  (seg[i].start == seg[std::size_t(best)].start &&
                   seg[i].end > seg[std::size_t(best)].end))))
                best = int(i);
        }
        if (best < 0) break;
        const auto& b = seg[std::size_t(best)];
        kept.push_back(b);
        dead[std::size_t(best)] = true;
        for (std::size_t i = 0; i < seg.size(); ++i) {
            if (dead[i]) continue;
            if (per_class && seg[i].category != b.category) continue;
            if (iou_segments({seg[i].start, seg[i].end}, {b.start, b.end}) >= thr)
                dead[i] = true;
        }
    }
    return kept;
}

}  // namespace

TEST_CASE("nms agrees with the quadratic oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ScoredSegment> seg;
        const int n = 1 + int(rng() % 60);
        for (int i = 0; i < n; ++i) {
            const double s = u01(rng) * 500.0;
            // quantized scores force plenty of ties
            seg.push_back({s, s + 10.0 + u01(rng) * 60.0,
                           std::round(u01(rng) * 8.0) / 8.0, int(rng() % 4)});
        }
        for (bool per_class : {false, true}) {
            const auto a = nms_1d(seg, 0.5, per_class);
            const auto b = nms_oracle(seg, 0.5, per_class);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i].start == b[i].start);
                CHECK(a[i].end == b[i].end);
                CHECK(a[i].score == b[i].score);
                CHECK(a[i].category == b[i].category);
            }
        }
    }
}

TEST_CASE("nms keeps disjoint segments untouched") {
    std::vector<ScoredSegment> seg{{0, 20, 0.9, 0}, {100, 130, 0.5, 1}, {300, 350, 0.99, 2}};
    const auto kept = nms_1d(seg, 0.5, false);
    CHECK(kept.size() == 3);
    CHECK(kept[0].score == 0.99);  // sorted by score
}
