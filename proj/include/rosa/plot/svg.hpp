#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rosa/core/types.hpp"
#include "rosa/dsp/spectrogram.hpp"

namespace rosa::plot {

// Small self-contained SVG writers for reports. Every figure is plain
// SVG 1.1 with one <rect>/<circle>/<line> per datum so tests can count
// elements.

// spectrogram heatmap; values mapped through a viridis-like ramp between
// the 1st and 99th percentile
void save_spectrogram_heatmap(const dsp::Spectrogram& s, const std::filesystem::path& file,
                              int max_cols = 1200);

// annotated vs detected segments on a shared time axis
void save_event_timeline(double duration_s, const std::vector<EventAnnotation>& truth,
                         const std::vector<DetectedSegment>& detections,
                         const std::filesystem::path& file);

// scatter of paired per-session values (e.g. reference vs estimated AHI)
// with the identity line
void save_scatter(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& x_label, const std::string& y_label,
                  const std::filesystem::path& file);

// difference-vs-mean plot with bias and limit lines
void save_bland_altman(const std::vector<double>& a, const std::vector<double>& b,
                       const std::filesystem::path& file);

}  // namespace rosa::plot
