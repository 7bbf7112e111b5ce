#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rosa/dsp/spectrogram.hpp"
#include "rosa/net/model.hpp"

namespace rosa::net {

// one session's normalized spectrogram as a training tensor
struct TrainSample {
    std::string session_id;
    Tensor<float> x;  // (3, n_range_bins, n_frames)
    std::vector<Segment> gts;     // frame coordinates
    std::vector<int> gt_classes;  // 1..num_classes-1 (0 is background)
    double frame_rate_hz = 1.0;
};

TrainSample make_sample(const std::string& session_id, const dsp::ThreeChannelSpectrogram& spec,
                        const std::vector<EventAnnotation>& events);

// round-robin fold assignment; samples arrive ordered by subject so each
// fold sees every severity stratum
std::vector<int> fold_assignment(int n, int folds);

// SGD with momentum and cosine-annealed learning rate. The optional log
// stream receives one CSV row per step:
// epoch,step,lr,loss_total,loss_spn_cls,loss_spn_reg,loss_head_cls,loss_head_reg
RasaModel<float> train_model(const std::vector<TrainSample>& data, const ArchConfig& arch,
                             const TrainConfig& cfg, std::ostream* log = nullptr);

double cosine_lr(double base_lr, int epoch, int total_epochs);

}  // namespace rosa::net
