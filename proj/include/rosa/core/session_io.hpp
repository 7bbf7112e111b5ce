#pragma once

#include <filesystem>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa {

// On-disk session container:
//   manifest.json  — id, duration, radar config, tst, spo2 rate, file names
//   beat.c64       — row-major [chirp][sample], interleaved f32 I/Q, little-endian
//   spo2.csv       — header "t_s,spo2_pct"
//   events.jsonl   — one JSON object per line
void save_session(const SleepSession& session, const std::filesystem::path& directory);
SleepSession load_session(const std::filesystem::path& directory);

// detections.jsonl uses the events.jsonl schema plus a "score" field
void save_detections(const std::vector<DetectedSegment>& dets, const std::filesystem::path& file);
std::vector<DetectedSegment> load_detections(const std::filesystem::path& file);

}  // namespace rosa
