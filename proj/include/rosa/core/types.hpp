#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rosa {

// Exit-code families used by the CLI: usage 2, data 3, numeric 4.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kSpeedOfLight = 299792458.0;

// Minimum apnea/hypopnea duration in seconds (AASM scoring convention).
inline constexpr double kMinEventDuration = 10.0;

struct RadarConfig {
    double start_frequency_hz = 60e9;
    double sweep_bandwidth_hz = 3e9;
    double frame_rate_hz = 50.0;  // chirps/second, slow-time sampling rate
    int samples_per_chirp = 256;

    double range_resolution_m() const { return kSpeedOfLight / (2.0 * sweep_bandwidth_hz); }
    double wavelength_m() const { return kSpeedOfLight / start_frequency_hz; }
    void validate() const;
};

// Beat signal x[tau, t]: row-major [chirp][sample].
struct BeatMatrix {
    RadarConfig config;
    std::int64_t n_chirps = 0;
    std::vector<std::complex<float>> data;

    std::complex<float>* chirp(std::int64_t t) { return data.data() + t * config.samples_per_chirp; }
    const std::complex<float>* chirp(std::int64_t t) const {
        return data.data() + t * config.samples_per_chirp;
    }
    double duration_s() const { return double(n_chirps) / config.frame_rate_hz; }
    void validate() const;
};

// Range-slow-time matrix R[r, t], row-major [range_bin][chirp].
struct RangeTimeMatrix {
    int n_range_bins = 0;
    std::int64_t n_chirps = 0;
    double bin_spacing_m = 0.0;
    double slow_time_rate_hz = 0.0;
    std::vector<std::complex<float>> data;

    std::complex<float>* row(int r) { return data.data() + std::int64_t(r) * n_chirps; }
    const std::complex<float>* row(int r) const { return data.data() + std::int64_t(r) * n_chirps; }
};

struct SpO2Trace {
    double sample_rate_hz = 1.0;
    std::vector<float> samples;  // percent, in [0, 100]

    double duration_s() const { return samples.size() / sample_rate_hz; }
    void validate() const;
};

enum class EventCategory : int { CA = 0, OA = 1, MA = 2, H = 3 };

const char* to_string(EventCategory c);
EventCategory event_category_from_string(const std::string& s);
inline bool is_apnea(EventCategory c) { return c != EventCategory::H; }

struct EventAnnotation {
    EventCategory category = EventCategory::OA;
    double t_start_s = 0.0;
    double t_end_s = 0.0;

    double duration_s() const { return t_end_s - t_start_s; }
    void validate() const;
};

struct DetectedSegment {
    EventCategory category = EventCategory::OA;
    double score = 0.0;  // in [0, 1]
    double t_start_s = 0.0;
    double t_end_s = 0.0;

    double duration_s() const { return t_end_s - t_start_s; }
    void validate() const;
};

struct SleepSession {
    std::string id;
    std::optional<BeatMatrix> beat;  // absent when only spectrograms are stored
    SpO2Trace spo2;
    std::vector<EventAnnotation> events;  // ground truth
    double tst_h = 0.0;
    double duration_s = 0.0;

    void validate() const;
};

}  // namespace rosa
