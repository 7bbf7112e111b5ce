#pragma once

#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::net {

// 1D segment in frame coordinates
struct Segment {
    double start = 0;
    double end = 0;

    double center() const { return 0.5 * (start + end); }
    double length() const { return end - start; }
};

struct AnchorSegment {
    double center = 0;  // frame index in input coordinates
    double length = 0;  // frames
    int scale_id = 0;
    int level = 0;

    Segment segment() const { return {center - length / 2, center + length / 2}; }
};

struct SegmentDelta {
    double d_center = 0;
    double d_log_length = 0;
};

struct Proposal {
    double t_start = 0;  // frames
    double t_end = 0;
    double objectness = 0;
};

struct ScoredSegment {
    double start = 0;
    double end = 0;
    double score = 0;
    int category = 0;
};

double iou_segments(const Segment& a, const Segment& b);

// anchors of every scale at each time step of each pyramid level; centers
// sit at (step + 1/2) * stride in input-frame coordinates
std::vector<AnchorSegment> generate_anchors(const std::vector<int>& level_lengths,
                                            const std::vector<int>& level_strides,
                                            const std::vector<double>& scales_frames);

SegmentDelta encode_segment(const Segment& gt, const AnchorSegment& anchor);
Segment decode_segment(const SegmentDelta& delta, const AnchorSegment& anchor);

struct AnchorMatch {
    int label = -1;  // 1 positive, 0 negative, -1 ignored
    int gt_index = -1;
    SegmentDelta target;
};

// Faster-R-CNN-style matching: IoU >= pos_iou, or the argmax anchor of a
// ground truth (forced match); negative below neg_iou; ignored between.
std::vector<AnchorMatch> match_anchors(const std::vector<AnchorSegment>& anchors,
                                       const std::vector<Segment>& gts, double pos_iou = 0.7,
                                       double neg_iou = 0.3);

// Greedy NMS; ties broken by earlier start, then longer length.
std::vector<ScoredSegment> nms_1d(std::vector<ScoredSegment> segments, double iou_threshold,
                                  bool per_class);

}  // namespace rosa::net
