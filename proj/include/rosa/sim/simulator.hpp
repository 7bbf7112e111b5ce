#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::sim {

// Deterministic RNG owned by the caller. Helpers below avoid the standard
// distributions so that streams are reproducible across standard libraries.
using Rng = std::mt19937_64;

double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
double gaussian(Rng& rng);  // Box-Muller, one value per call
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream);

struct GroupSpec {
    double ahi_mean = 0;
    double ahi_spread = 0;
};

struct SpO2Model {
    double baseline_pct = 97.0;
    double delay_s = 25.0;  // kept below the 60 s fusion window
    double drop_tau_s = 5.0;
    double drop_duration_s = 15.0;
    double recovery_tau_s = 15.0;
    double noise_sigma = 0.15;
    double no_desat_ca_fraction = 0.2;  // central apneas without desaturation
};

struct CohortConfig {
    int n_subjects = 24;
    double duration_s = 3600.0;
    // severity groups: healthy, mild, moderate, severe
    std::array<GroupSpec, 4> groups{{{2.3, 1.0}, {8.1, 2.2}, {21.9, 3.9}, {57.2, 18.1}}};
    std::array<double, 4> category_mix{0.10, 0.50, 0.10, 0.30};  // CA, OA, MA, H
    double min_event_s = 10.0;
    double max_event_s = 60.0;
    double min_gap_s = 20.0;
    double artifact_rate_per_h = 2.0;
    double artifact_duration_s = 8.0;
    double benign_dip_rate_per_h = 0.0;  // shallow unannotated breathing dips
    SpO2Model spo2;
    RadarConfig radar;
    double subject_range_m = 1.0;
    double breath_rate_lo_hz = 0.2;
    double breath_rate_hi_hz = 0.4;
    double chest_amp_m = 1.0e-3;
    double apnea_amp_factor = 0.05;
    double hypopnea_amp_factor = 0.5;
    double benign_dip_factor = 0.6;
    double snr_db = 15.0;
    std::uint64_t seed = 42;

    void validate() const;
};

CohortConfig load_cohort_config(const std::filesystem::path& file);
void save_cohort_config(const CohortConfig& c, const std::filesystem::path& file);

struct Interval {
    double t_start_s = 0;
    double t_end_s = 0;
};

struct GenerationTrace {
    int subject_index = 0;
    int severity_group = 0;
    double target_ahi = 0;
    double true_ahi = 0;
    std::vector<Interval> artifacts;
    std::vector<Interval> benign_dips;
    std::vector<bool> event_desaturates;  // aligned with the schedule
};

struct SyntheticSession {
    SleepSession session;
    GenerationTrace trace;
};

std::vector<EventAnnotation> generate_event_schedule(const CohortConfig& config,
                                                     double subject_ahi, Rng& rng);
std::vector<Interval> generate_intervals(double rate_per_h, double duration_s, double length_s,
                                         Rng& rng);

BeatMatrix synthesize_beat(const std::vector<EventAnnotation>& schedule,
                           const std::vector<Interval>& artifacts,
                           const std::vector<Interval>& benign_dips, const CohortConfig& config,
                           Rng& rng);

SpO2Trace synthesize_spo2(const std::vector<EventAnnotation>& schedule,
                          const std::vector<bool>& event_desaturates, const CohortConfig& config,
                          Rng& rng);

// Full in-memory generation of one subject (deterministic in (seed, index)).
SyntheticSession simulate_subject(const CohortConfig& config, int subject_index);

// Generates the cohort and saves each session via the session container.
// Returns the session directories in subject order.
std::vector<std::filesystem::path> generate_cohort(const CohortConfig& config,
                                                   const std::filesystem::path& out_dir);

}  // namespace rosa::sim
