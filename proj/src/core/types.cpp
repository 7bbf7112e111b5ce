#include "rosa/core/types.hpp"

#include <cmath>

namespace rosa {

void RadarConfig::validate() const {
    if (start_frequency_hz <= 0 || sweep_bandwidth_hz <= 0 || frame_rate_hz <= 0 ||
        samples_per_chirp <= 0)
        throw DataError("radar config: all fields must be positive");
}

void BeatMatrix::validate() const {
    config.validate();
    if (n_chirps < 1) throw DataError("beat matrix: need at least one chirp");
    if (data.size() != std::size_t(n_chirps) * config.samples_per_chirp)
        throw DataError("beat matrix: data size does not match (n_chirps, samples_per_chirp)");
}

void SpO2Trace::validate() const {
    if (sample_rate_hz <= 0) throw DataError("spo2 trace: sample rate must be positive");
    for (float v : samples)
        if (!(v >= 0.0f && v <= 100.0f))
            throw DataError("spo2 trace: sample outside [0, 100]");
}

const char* to_string(EventCategory c) {
    switch (c) {
        case EventCategory::CA: return "CA";
        case EventCategory::OA: return "OA";
        case EventCategory::MA: return "MA";
        case EventCategory::H: return "H";
    }
    return "?";
}

EventCategory event_category_from_string(const std::string& s) {
    if (s == "CA") return EventCategory::CA;
    if (s == "OA") return EventCategory::OA;
    if (s == "MA") return EventCategory::MA;
    if (s == "H") return EventCategory::H;
    throw DataError("unknown event category: " + s);
}

void EventAnnotation::validate() const {
    if (!(t_end_s > t_start_s)) throw DataError("event: t_end must exceed t_start");
    if (duration_s() < kMinEventDuration)
        throw DataError("event: duration below the 10 s scoring minimum");
}

void DetectedSegment::validate() const {
    if (!(t_end_s > t_start_s)) throw DataError("detection: t_end must exceed t_start");
    if (!(score >= 0.0 && score <= 1.0)) throw DataError("detection: score outside [0, 1]");
}

void SleepSession::validate() const {
    if (!(tst_h > 0)) throw DataError("session: tst must be positive");
    if (!(duration_s > 0)) throw DataError("session: duration must be positive");
    if (beat) {
        beat->validate();
        if (std::abs(beat->duration_s() - duration_s) > 1.0)
            throw DataError("session: beat duration disagrees with declared duration");
    }
    spo2.validate();
    for (const auto& e : events) {
        e.validate();
        if (e.t_start_s < 0 || e.t_end_s > duration_s)
            throw DataError("session: event outside [0, duration]");
    }
}

}  // namespace rosa
