#include "rosa/net/anchors.hpp"

#include <algorithm>
#include <cmath>

namespace rosa::net {

double iou_segments(const Segment& a, const Segment& b) {
    const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    const double uni = a.length() + b.length() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

std::vector<AnchorSegment> generate_anchors(const std::vector<int>& level_lengths,
                                            const std::vector<int>& level_strides,
                                            const std::vector<double>& scales_frames) {
    if (level_lengths.size() != level_strides.size())
        throw DataError("generate_anchors: level shape mismatch");
    std::vector<AnchorSegment> anchors;
    for (std::size_t level = 0; level < level_lengths.size(); ++level) {
        for (int t = 0; t < level_lengths[level]; ++t) {
            const double center = (t + 0.5) * level_strides[level];
            for (std::size_t s = 0; s < scales_frames.size(); ++s)
                anchors.push_back({center, scales_frames[s], int(s), int(level)});
        }
    }
    return anchors;
}

SegmentDelta encode_segment(const Segment& gt, const AnchorSegment& anchor) {
    if (!(anchor.length > 0) || !(gt.length() > 0))
        throw DataError("encode_segment: non-positive length");
    return {(gt.center() - anchor.center) / anchor.length,
            std::log(gt.length() / anchor.length)};
}

Segment decode_segment(const SegmentDelta& delta, const AnchorSegment& anchor) {
    if (!(anchor.length > 0)) throw DataError("decode_segment: non-positive anchor length");
    const double center = anchor.center + delta.d_center * anchor.length;
    const double length = anchor.length * std::exp(delta.d_log_length);
    return {center - length / 2, center + length / 2};
}

std::vector<AnchorMatch> match_anchors(const std::vector<AnchorSegment>& anchors,
                                       const std::vector<Segment>& gts, double pos_iou,
                                       double neg_iou) {
    if (!(0 <= neg_iou && neg_iou < pos_iou && pos_iou <= 1))
        throw DataError("match_anchors: need 0 <= neg < pos <= 1");

    std::vector<AnchorMatch> out(anchors.size());
    if (gts.empty()) {
        for (auto& m : out) m.label = 0;
        return out;
    }

    std::vector<double> best_gt_iou(gts.size(), -1.0);
    std::vector<int> best_gt_anchor(gts.size(), -1);
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const Segment as = anchors[a].segment();
        double best = -1;
        int best_g = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double v = iou_segments(as, gts[g]);
            if (v > best) {
                best = v;
                best_g = int(g);
            }
            if (v > best_gt_iou[g]) {
                best_gt_iou[g] = v;
                best_gt_anchor[g] = int(a);
            }
        }
        auto& m = out[a];
        m.gt_index = best_g;
        if (best >= pos_iou)
            m.label = 1;
        else if (best < neg_iou)
            m.label = 0;
        else
            m.label = -1;
    }
    // forced matches: each gt keeps its argmax anchor positive
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (best_gt_anchor[g] >= 0 && best_gt_iou[g] > 0) {
            auto& m = out[std::size_t(best_gt_anchor[g])];
            m.label = 1;
            m.gt_index = int(g);
        }
    }
    for (auto& m : out)
        if (m.label == 1) m.target = encode_segment(gts[std::size_t(m.gt_index)],
                                                    anchors[std::size_t(&m - out.data())]);
    return out;
}

std::vector<ScoredSegment> nms_1d(std::vector<ScoredSegment> segments, double iou_threshold,
                                  bool per_class) {
    std::stable_sort(segments.begin(), segments.end(), [](const ScoredSegment& a, const ScoredSegment& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.start != b.start) return a.start < b.start;
        return (a.end - a.start) > (b.end - b.start);
    });
    std::vector<ScoredSegment> kept;
    std::vector<bool> removed(segments.size(), false);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (removed[i]) continue;
        kept.push_back(segments[i]);
        for (std::size_t j = i + 1; j < segments.size(); ++j) {
            if (removed[j]) continue;
            if (per_class && segments[j].category != segments[i].category) continue;
            const double v = iou_segments({segments[i].start, segments[i].end},
                                          {segments[j].start, segments[j].end});
            if (v >= iou_threshold) removed[j] = true;
        }
    }
    return kept;
}

}  // namespace rosa::net
