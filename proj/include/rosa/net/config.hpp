#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::net {

// architecture and inference knobs for the segment detector
struct ArchConfig {
    int width = 64;           // channel count through backbone and SPN
    int head_hidden = 64;     // FC width in the classification head
    int roi_size = 8;         // RoIAlign output bins
    int num_classes = 5;      // background + CA/OA/MA/H
    bool max_range_pool = false;

    std::vector<double> anchor_scales_s = {15.0, 30.0, 60.0, 120.0};
    std::vector<int> level_strides = {4, 8, 16};

    double spn_pos_iou = 0.7;
    double spn_neg_iou = 0.3;
    double proposal_pos_iou = 0.5;  // proposal/gt IoU for head labels
    int pre_nms_topk = 2000;
    int post_nms_topk = 200;
    double proposal_nms_iou = 0.7;
    double detect_nms_iou = 0.5;
    double score_floor = 0.05;
    double min_duration_s = 10.0;

    // "one_minus_bg": score = 1 - P(background); "class": max class prob
    std::string score_mode = "one_minus_bg";

    void validate() const;
};

struct TrainConfig {
    int epochs = 80;
    double base_lr = 0.01;
    double momentum = 0.9;
    int crop_frames = 1800;
    int crops_per_session = 4;     // crops drawn per session per epoch
    double event_crop_bias = 0.8;  // fraction of crops centered on an event
    std::uint64_t seed = 1;
    int folds = 4;

    void validate() const;
};

ArchConfig load_arch_config(const std::string& path);
void save_arch_config(const ArchConfig& cfg, const std::string& path);
TrainConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& cfg, const std::string& path);

}  // namespace rosa::net
