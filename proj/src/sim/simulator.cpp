#include "rosa/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "rosa/core/session_io.hpp"

namespace rosa::sim {

using nlohmann::json;
constexpr double pi = std::numbers::pi;

double uniform01(Rng& rng) { return double(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double gaussian(Rng& rng) {
    // Box-Muller; draws until u > 0 so log stays finite
    double u = 0;
    do {
        u = uniform01(rng);
    } while (u <= 0);
    const double v = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * pi * v);
}

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step over (seed, stream)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void CohortConfig::validate() const {
    radar.validate();
    if (n_subjects < 0) throw DataError("cohort: n_subjects must be >= 0");
    if (!(duration_s > 0)) throw DataError("cohort: duration must be positive");
    double mix = 0;
    for (double p : category_mix) {
        if (p < 0) throw DataError("cohort: category mix entries must be >= 0");
        mix += p;
    }
    if (std::abs(mix - 1.0) > 1e-9) throw DataError("cohort: category mix must sum to 1");
    for (const auto& g : groups)
        if (g.ahi_mean < 0) throw DataError("cohort: AHI means must be >= 0");
    if (spo2.delay_s < 0) throw DataError("cohort: desaturation delay must be >= 0");
    if (!(min_event_s >= kMinEventDuration))
        throw DataError("cohort: events must honor the 10 s scoring minimum");
    if (!(max_event_s >= min_event_s)) throw DataError("cohort: event duration range inverted");
}

namespace {

json spo2_to_json(const SpO2Model& m) {
    return json{{"baseline_pct", m.baseline_pct},
                {"delay_s", m.delay_s},
                {"drop_tau_s", m.drop_tau_s},
                {"drop_duration_s", m.drop_duration_s},
                {"recovery_tau_s", m.recovery_tau_s},
                {"noise_sigma", m.noise_sigma},
                {"no_desat_ca_fraction", m.no_desat_ca_fraction}};
}

void spo2_from_json(const json& j, SpO2Model& m) {
    m.baseline_pct = j.value("baseline_pct", m.baseline_pct);
    m.delay_s = j.value("delay_s", m.delay_s);
    m.drop_tau_s = j.value("drop_tau_s", m.drop_tau_s);
    m.drop_duration_s = j.value("drop_duration_s", m.drop_duration_s);
    m.recovery_tau_s = j.value("recovery_tau_s", m.recovery_tau_s);
    m.noise_sigma = j.value("noise_sigma", m.noise_sigma);
    m.no_desat_ca_fraction = j.value("no_desat_ca_fraction", m.no_desat_ca_fraction);
}

}  // namespace

void save_cohort_config(const CohortConfig& c, const std::filesystem::path& file) {
    json j{
        {"n_subjects", c.n_subjects},
        {"duration_s", c.duration_s},
        {"groups", json::array()},
        {"category_mix", c.category_mix},
        {"min_event_s", c.min_event_s},
        {"max_event_s", c.max_event_s},
        {"min_gap_s", c.min_gap_s},
        {"artifact_rate_per_h", c.artifact_rate_per_h},
        {"artifact_duration_s", c.artifact_duration_s},
        {"benign_dip_rate_per_h", c.benign_dip_rate_per_h},
        {"spo2", spo2_to_json(c.spo2)},
        {"radar", {{"start_frequency_hz", c.radar.start_frequency_hz},
                   {"sweep_bandwidth_hz", c.radar.sweep_bandwidth_hz},
                   {"frame_rate_hz", c.radar.frame_rate_hz},
                   {"samples_per_chirp", c.radar.samples_per_chirp}}},
        {"subject_range_m", c.subject_range_m},
        {"breath_rate_lo_hz", c.breath_rate_lo_hz},
        {"breath_rate_hi_hz", c.breath_rate_hi_hz},
        {"chest_amp_m", c.chest_amp_m},
        {"apnea_amp_factor", c.apnea_amp_factor},
        {"hypopnea_amp_factor", c.hypopnea_amp_factor},
        {"benign_dip_factor", c.benign_dip_factor},
        {"snr_db", c.snr_db},
        {"seed", c.seed},
    };
    for (const auto& g : c.groups)
        j["groups"].push_back(json{{"ahi_mean", g.ahi_mean}, {"ahi_spread", g.ahi_spread}});
    std::ofstream f(file);
    if (!f) throw DataError("cannot open for write: " + file.string());
    f << j.dump(2) << "\n";
}

CohortConfig load_cohort_config(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw DataError("missing cohort config: " + file.string());
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw DataError("malformed cohort config: " + std::string(e.what()));
    }
    CohortConfig c;
    c.n_subjects = j.value("n_subjects", c.n_subjects);
    c.duration_s = j.value("duration_s", c.duration_s);
    if (j.contains("groups")) {
        if (j["groups"].size() != 4) throw DataError("cohort config: expected 4 severity groups");
        for (int i = 0; i < 4; ++i) {
            c.groups[i].ahi_mean = j["groups"][i].value("ahi_mean", 0.0);
            c.groups[i].ahi_spread = j["groups"][i].value("ahi_spread", 0.0);
        }
    }
    if (j.contains("category_mix")) {
        for (int i = 0; i < 4; ++i) c.category_mix[i] = j["category_mix"][i].get<double>();
    }
    c.min_event_s = j.value("min_event_s", c.min_event_s);
    c.max_event_s = j.value("max_event_s", c.max_event_s);
    c.min_gap_s = j.value("min_gap_s", c.min_gap_s);
    c.artifact_rate_per_h = j.value("artifact_rate_per_h", c.artifact_rate_per_h);
    c.artifact_duration_s = j.value("artifact_duration_s", c.artifact_duration_s);
    c.benign_dip_rate_per_h = j.value("benign_dip_rate_per_h", c.benign_dip_rate_per_h);
    if (j.contains("spo2")) spo2_from_json(j["spo2"], c.spo2);
    if (j.contains("radar")) {
        const auto& r = j["radar"];
        c.radar.start_frequency_hz = r.value("start_frequency_hz", c.radar.start_frequency_hz);
        c.radar.sweep_bandwidth_hz = r.value("sweep_bandwidth_hz", c.radar.sweep_bandwidth_hz);
        c.radar.frame_rate_hz = r.value("frame_rate_hz", c.radar.frame_rate_hz);
        c.radar.samples_per_chirp = r.value("samples_per_chirp", c.radar.samples_per_chirp);
    }
    c.subject_range_m = j.value("subject_range_m", c.subject_range_m);
    c.breath_rate_lo_hz = j.value("breath_rate_lo_hz", c.breath_rate_lo_hz);
    c.breath_rate_hi_hz = j.value("breath_rate_hi_hz", c.breath_rate_hi_hz);
    c.chest_amp_m = j.value("chest_amp_m", c.chest_amp_m);
    c.apnea_amp_factor = j.value("apnea_amp_factor", c.apnea_amp_factor);
    c.hypopnea_amp_factor = j.value("hypopnea_amp_factor", c.hypopnea_amp_factor);
    c.benign_dip_factor = j.value("benign_dip_factor", c.benign_dip_factor);
    c.snr_db = j.value("snr_db", c.snr_db);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

std::vector<EventAnnotation> generate_event_schedule(const CohortConfig& config,
                                                     double subject_ahi, Rng& rng) {
    if (subject_ahi < 0) throw DataError("schedule: AHI must be >= 0");
    const double duration_h = config.duration_s / 3600.0;
    const int n = int(std::llround(subject_ahi * duration_h));
    if (n == 0) return {};

    std::vector<double> durations(n);
    for (auto& d : durations) d = uniform(rng, config.min_event_s, config.max_event_s);

    double total = config.min_gap_s * (n + 1);
    for (double d : durations) total += d;
    double slack = config.duration_s - total;
    if (slack < 0) {
        // retry at the minimum duration before declaring the night full
        slack = config.duration_s - (config.min_event_s + config.min_gap_s) * n - config.min_gap_s;
        if (slack < 0)
            throw DataError("schedule: requested events cannot fit the night at the given gaps");
        std::fill(durations.begin(), durations.end(), config.min_event_s);
    }

    // spread the slack over the n+1 gaps
    std::vector<double> cuts(n + 1);
    double cut_sum = 0;
    for (auto& cgap : cuts) {
        cgap = uniform01(rng) + 1e-6;
        cut_sum += cgap;
    }
    for (auto& cgap : cuts) cgap = cgap / cut_sum * slack;

    std::vector<EventAnnotation> schedule(n);
    double t = 0;
    for (int i = 0; i < n; ++i) {
        t += config.min_gap_s + cuts[i];
        // category by inverse CDF over the configured mix
        const double u = uniform01(rng);
        double acc = 0;
        int cat = 3;
        for (int c = 0; c < 4; ++c) {
            acc += config.category_mix[c];
            if (u < acc) {
                cat = c;
                break;
            }
        }
        schedule[i].category = EventCategory(cat);
        schedule[i].t_start_s = t;
        schedule[i].t_end_s = t + durations[i];
        t = schedule[i].t_end_s;
    }
    return schedule;
}

std::vector<Interval> generate_intervals(double rate_per_h, double duration_s, double length_s,
                                         Rng& rng) {
    const int n = int(std::llround(rate_per_h * duration_s / 3600.0));
    std::vector<Interval> out;
    for (int i = 0; i < n; ++i) {
        const double len = length_s * uniform(rng, 0.6, 1.4);
        const double start = uniform(rng, 0.0, std::max(0.0, duration_s - len));
        out.push_back({start, start + len});
    }
    std::sort(out.begin(), out.end(),
              [](const Interval& a, const Interval& b) { return a.t_start_s < b.t_start_s; });
    return out;
}

namespace {

// amplitude scale factor at time t: events and benign dips attenuate the
// chest displacement, ramped over 2 s at both edges
double amplitude_factor(double t, const std::vector<EventAnnotation>& schedule,
                        const std::vector<Interval>& dips, const CohortConfig& cfg) {
    constexpr double ramp = 2.0;
    double factor = 1.0;
    for (const auto& e : schedule) {
        if (t < e.t_start_s - ramp || t > e.t_end_s + ramp) continue;
        const double target =
            is_apnea(e.category) ? cfg.apnea_amp_factor : cfg.hypopnea_amp_factor;
        double w = 1.0;  // 0 outside, 1 fully inside
        if (t < e.t_start_s + ramp) w = std::clamp((t - (e.t_start_s - ramp)) / (2 * ramp), 0.0, 1.0);
        if (t > e.t_end_s - ramp) w = std::clamp(((e.t_end_s + ramp) - t) / (2 * ramp), 0.0, 1.0);
        factor = std::min(factor, 1.0 + w * (target - 1.0));
    }
    for (const auto& d : dips) {
        if (t < d.t_start_s - ramp || t > d.t_end_s + ramp) continue;
        double w = 1.0;
        if (t < d.t_start_s + ramp) w = std::clamp((t - (d.t_start_s - ramp)) / (2 * ramp), 0.0, 1.0);
        if (t > d.t_end_s - ramp) w = std::clamp(((d.t_end_s + ramp) - t) / (2 * ramp), 0.0, 1.0);
        factor = std::min(factor, 1.0 + w * (cfg.benign_dip_factor - 1.0));
    }
    return factor;
}

}  // namespace

BeatMatrix synthesize_beat(const std::vector<EventAnnotation>& schedule,
                           const std::vector<Interval>& artifacts,
                           const std::vector<Interval>& benign_dips, const CohortConfig& config,
                           Rng& rng) {
    config.validate();
    BeatMatrix beat;
    beat.config = config.radar;
    beat.n_chirps = std::int64_t(std::llround(config.duration_s * config.radar.frame_rate_hz));
    const int n = config.radar.samples_per_chirp;
    beat.data.resize(std::size_t(beat.n_chirps) * n);

    const double bin = config.subject_range_m / config.radar.range_resolution_m();
    const double breath_hz = uniform(rng, config.breath_rate_lo_hz, config.breath_rate_hi_hz);
    const double phase_gain = 4.0 * pi / config.radar.wavelength_m();
    const double noise_sigma =
        std::sqrt(std::pow(10.0, -config.snr_db / 10.0) / 2.0);  // per component

    const std::complex<double> tone_step = std::polar(1.0, 2.0 * pi * bin / double(n));

    std::size_t artifact_cursor = 0;
    for (std::int64_t t = 0; t < beat.n_chirps; ++t) {
        const double tt = double(t) / config.radar.frame_rate_hz;
        const double amp = amplitude_factor(tt, schedule, benign_dips, config);
        const double displacement = config.chest_amp_m * amp * std::sin(2.0 * pi * breath_hz * tt);

        while (artifact_cursor < artifacts.size() && tt > artifacts[artifact_cursor].t_end_s)
            ++artifact_cursor;
        const bool in_artifact = artifact_cursor < artifacts.size() &&
                                 tt >= artifacts[artifact_cursor].t_start_s &&
                                 tt <= artifacts[artifact_cursor].t_end_s;
        double phase = phase_gain * displacement;
        if (in_artifact) phase += 1.5 * gaussian(rng);  // broadband phase jitter burst

        std::complex<double> c = std::polar(1.0, phase);
        auto* chirp = beat.chirp(t);
        for (int i = 0; i < n; ++i) {
            chirp[i] = std::complex<float>(float(c.real() + noise_sigma * gaussian(rng)),
                                           float(c.imag() + noise_sigma * gaussian(rng)));
            c *= tone_step;
        }
    }
    return beat;
}

SpO2Trace synthesize_spo2(const std::vector<EventAnnotation>& schedule,
                          const std::vector<bool>& event_desaturates, const CohortConfig& config,
                          Rng& rng) {
    const auto& m = config.spo2;
    SpO2Trace trace;
    trace.sample_rate_hz = 1.0;
    const auto n = std::size_t(std::llround(config.duration_s));
    trace.samples.resize(n);

    std::vector<double> deficit(n, 0.0);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& e = schedule[i];
        if (i < event_desaturates.size() && !event_desaturates[i]) continue;
        double depth = std::min(3.0 + 0.1 * (e.duration_s() - 10.0), 10.0);
        if (!is_apnea(e.category)) depth *= 0.6;
        const double t0 = e.t_start_s + m.delay_s;
        const double t1 = t0 + m.drop_duration_s;
        const double nadir = depth * (1.0 - std::exp(-m.drop_duration_s / m.drop_tau_s));
        for (std::size_t k = 0; k < n; ++k) {
            const double t = double(k);
            if (t < t0) continue;
            if (t <= t1)
                deficit[k] += depth * (1.0 - std::exp(-(t - t0) / m.drop_tau_s));
            else
                deficit[k] += nadir * std::exp(-(t - t1) / m.recovery_tau_s);
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double v = m.baseline_pct - deficit[k] + m.noise_sigma * gaussian(rng);
        trace.samples[k] = float(std::clamp(v, 0.0, 100.0));
    }
    return trace;
}

SyntheticSession simulate_subject(const CohortConfig& config, int subject_index) {
    config.validate();
    if (subject_index < 0 || subject_index >= std::max(config.n_subjects, 1))
        throw DataError("simulate_subject: index out of range");

    const std::uint64_t base = child_seed(config.seed, std::uint64_t(subject_index));
    Rng schedule_rng(child_seed(base, 1));
    Rng beat_rng(child_seed(base, 2));
    Rng spo2_rng(child_seed(base, 3));

    const int group = config.n_subjects > 0
                          ? std::min(3, subject_index * 4 / std::max(config.n_subjects, 1))
                          : 0;
    const auto& g = config.groups[group];
    const double target_ahi =
        std::max(0.0, g.ahi_mean + g.ahi_spread * uniform(schedule_rng, -1.0, 1.0));

    SyntheticSession out;
    out.trace.subject_index = subject_index;
    out.trace.severity_group = group;
    out.trace.target_ahi = target_ahi;

    auto schedule = generate_event_schedule(config, target_ahi, schedule_rng);
    out.trace.artifacts = generate_intervals(config.artifact_rate_per_h, config.duration_s,
                                             config.artifact_duration_s, schedule_rng);
    out.trace.benign_dips = generate_intervals(config.benign_dip_rate_per_h, config.duration_s,
                                               15.0, schedule_rng);
    out.trace.event_desaturates.resize(schedule.size(), true);
    for (std::size_t i = 0; i < schedule.size(); ++i)
        if (schedule[i].category == EventCategory::CA &&
            uniform01(schedule_rng) < config.spo2.no_desat_ca_fraction)
            out.trace.event_desaturates[i] = false;

    auto& s = out.session;
    s.id = "s" + std::string(subject_index < 10 ? "0" : "") + std::to_string(subject_index);
    s.duration_s = config.duration_s;
    s.tst_h = config.duration_s / 3600.0;
    s.events = schedule;
    s.beat = synthesize_beat(schedule, out.trace.artifacts, out.trace.benign_dips, config,
                             beat_rng);
    s.spo2 = synthesize_spo2(schedule, out.trace.event_desaturates, config, spo2_rng);
    out.trace.true_ahi = double(schedule.size()) / s.tst_h;
    return out;
}

std::vector<std::filesystem::path> generate_cohort(const CohortConfig& config,
                                                   const std::filesystem::path& out_dir) {
    config.validate();
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> dirs;
    for (int i = 0; i < config.n_subjects; ++i) {
        SyntheticSession s = simulate_subject(config, i);
        const auto dir = out_dir / s.session.id;
        save_session(s.session, dir);

        json trace{{"subject_index", s.trace.subject_index},
                   {"severity_group", s.trace.severity_group},
                   {"target_ahi", s.trace.target_ahi},
                   {"true_ahi", s.trace.true_ahi},
                   {"artifacts", json::array()},
                   {"benign_dips", json::array()},
                   {"event_desaturates", s.trace.event_desaturates}};
        for (const auto& a : s.trace.artifacts)
            trace["artifacts"].push_back(json{{"t_start_s", a.t_start_s}, {"t_end_s", a.t_end_s}});
        for (const auto& d : s.trace.benign_dips)
            trace["benign_dips"].push_back(
                json{{"t_start_s", d.t_start_s}, {"t_end_s", d.t_end_s}});
        std::ofstream f(dir / "gen_trace.json");
        f << trace.dump(2) << "\n";
        dirs.push_back(dir);
    }
    return dirs;
}

}  // namespace rosa::sim
