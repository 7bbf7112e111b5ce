#pragma once

#include <filesystem>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::fusion {

struct SpO2Features {
    double p_d = 0;  // depth of the first qualifying desaturation, percentage points
    double p_r = 0;  // subsequent rise from that nadir
    bool empty_window = false;
};

struct FusionParams {
    double alpha = 0.5;
    double beta = 0.6;
    double t1 = 4.0;
    double t2 = 2.0;
    double delta_t_s = 60.0;
    double decision_threshold = 0.5;  // final score cut for event counting

    void validate() const;
};

FusionParams load_fusion_params(const std::filesystem::path& file);
void save_fusion_params(const FusionParams& p, const std::filesystem::path& file);

// Scans s[t_start, t_start + delta_t) for local-max -> local-min drops
// after median-of-3 smoothing. The first drop >= 3 points sets p_d,
// otherwise the maximum drop in the window; p_r is the rise from that
// nadir, searched up to 60 s past it.
SpO2Features extract_od_features(const SpO2Trace& s, double t_start_s, double delta_t_s = 60.0);

double fuse_score(double p, const SpO2Features& f, const FusionParams& params);

struct FusedDetections {
    std::vector<DetectedSegment> all;       // every input detection, rescored
    std::vector<DetectedSegment> accepted;  // score >= decision threshold
};

FusedDetections fuse_session(const std::vector<DetectedSegment>& detections, const SpO2Trace& s,
                             const FusionParams& params);

struct GridSearchInput {
    std::vector<DetectedSegment> detections;  // radar-only scores
    SpO2Trace spo2;
    double true_ahi = 0;
    double tst_h = 0;
};

// Exhaustive search over (t1, t2) pairs with t2 < t1, maximizing the ICC
// between fused AHI and true AHI; ties go to the lexicographically
// smaller pair.
FusionParams grid_search_thresholds(const std::vector<GridSearchInput>& sessions,
                                    const std::vector<double>& t1_grid,
                                    const std::vector<double>& t2_grid,
                                    const FusionParams& base = {});

std::vector<double> default_t1_grid();  // 2 .. 8 step 0.5
std::vector<double> default_t2_grid();  // 0.5 .. 4 step 0.5

}  // namespace rosa::fusion
