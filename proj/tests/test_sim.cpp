#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rosa/sim/simulator.hpp"

using namespace rosa;

TEST_CASE("event schedule hits the target count with valid spacing") {
    sim::CohortConfig cfg;
    cfg.duration_s = 3600.0;
    sim::Rng rng(123);
    const double ahi = 18.0;
    const auto schedule = sim::generate_event_schedule(cfg, ahi, rng);
    CHECK(schedule.size() == 18);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& e = schedule[i];
        CHECK(e.duration_s() >= cfg.min_event_s);
        CHECK(e.duration_s() <= cfg.max_event_s + 1e-9);
        CHECK(e.t_start_s >= 0.0);
        CHECK(e.t_end_s <= cfg.duration_s);
        if (i > 0) CHECK(e.t_start_s - schedule[i - 1].t_end_s >= cfg.min_gap_s - 1e-9);
    }
}

TEST_CASE("schedule respects the category mix on average") {
    sim::CohortConfig cfg;
    cfg.duration_s = 3600.0;
    sim::Rng rng(7);
    int counts[4] = {0, 0, 0, 0};
    int total = 0;
    for (int trial = 0; trial < 40; ++trial) {
        for (const auto& e : sim::generate_event_schedule(cfg, 40.0, rng)) {
            ++counts[int(e.category)];
            ++total;
        }
    }
    // mix is CA 10%, OA 50%, MA 10%, H 30%
    CHECK(double(counts[0]) / total == doctest::Approx(0.10).epsilon(0.35));
    CHECK(double(counts[1]) / total == doctest::Approx(0.50).epsilon(0.15));
    CHECK(double(counts[3]) / total == doctest::Approx(0.30).epsilon(0.2));
}

TEST_CASE("infeasible schedules raise data errors") {
    sim::CohortConfig cfg;
    cfg.duration_s = 120.0;
    sim::Rng rng(1);
    CHECK_THROWS_AS(sim::generate_event_schedule(cfg, 3000.0, rng), DataError);
}

TEST_CASE("subject synthesis is bit-identical across runs") {
    sim::CohortConfig cfg;
    cfg.n_subjects = 4;
    cfg.duration_s = 60.0;
    cfg.seed = 99;
    const auto a = sim::simulate_subject(cfg, 2);
    const auto b = sim::simulate_subject(cfg, 2);
    REQUIRE(a.session.beat.has_value());
    CHECK(a.session.beat->data == b.session.beat->data);
    CHECK(a.session.spo2.samples == b.session.spo2.samples);
    REQUIRE(a.session.events.size() == b.session.events.size());
    for (std::size_t i = 0; i < a.session.events.size(); ++i) {
        CHECK(a.session.events[i].t_start_s == b.session.events[i].t_start_s);
        CHECK(a.session.events[i].t_end_s == b.session.events[i].t_end_s);
    }
    // a different subject index diverges
    const auto c = sim::simulate_subject(cfg, 3);
    CHECK(a.session.beat->data != c.session.beat->data);
}

TEST_CASE("severity groups follow the block assignment") {
    sim::CohortConfig cfg;
    cfg.n_subjects = 8;
    cfg.duration_s = 60.0;
    for (int i = 0; i < 8; ++i) {
        const auto s = sim::simulate_subject(cfg, i);
        CHECK(s.trace.severity_group == i / 2);
    }
}

TEST_CASE("spo2 desaturation reaches the modeled depth") {
    sim::CohortConfig cfg;
    cfg.duration_s = 300.0;
    cfg.spo2.noise_sigma = 0.0;
    cfg.spo2.no_desat_ca_fraction = 0.0;
    std::vector<EventAnnotation> schedule{{EventCategory::OA, 60.0, 90.0}};
    sim::Rng rng(5);
    const auto trace = sim::synthesize_spo2(schedule, {true}, cfg, rng);
    REQUIRE(trace.samples.size() == 300);
    // baseline before the event
    CHECK(double(trace.samples[30]) == doctest::Approx(97.0).epsilon(1e-6));
    // modeled depth for a 30 s apnea: 3 + 0.1 * (30 - 10) = 5 points
    float nadir = 100.0f;
    for (const float v : trace.samples) nadir = std::min(nadir, v);
    CHECK(double(nadir) == doctest::Approx(92.0).epsilon(0.02));
    // the drop happens after the sensor delay, not before
    CHECK(trace.samples[70] > 96.0f);
    // recovered near baseline by the end
    CHECK(trace.samples[290] > 96.0f);
}

TEST_CASE("hypopnea desaturates less than apnea") {
    sim::CohortConfig cfg;
    cfg.duration_s = 300.0;
    cfg.spo2.noise_sigma = 0.0;
    sim::Rng rng(5);
    const auto ap = sim::synthesize_spo2({{EventCategory::OA, 60.0, 90.0}}, {true}, cfg, rng);
    const auto hy = sim::synthesize_spo2({{EventCategory::H, 60.0, 90.0}}, {true}, cfg, rng);
    const auto nadir = [](const SpO2Trace& t) {
        float m = 100.0f;
        for (float v : t.samples) m = std::min(m, v);
        return m;
    };
    CHECK(nadir(hy) > nadir(ap));
}

TEST_CASE("beat amplitude drops during events") {
    sim::CohortConfig cfg;
    cfg.duration_s = 120.0;
    cfg.snr_db = 60.0;  // effectively noiseless
    std::vector<EventAnnotation> schedule{{EventCategory::CA, 60.0, 90.0}};
    sim::Rng rng(3);
    const auto beat = sim::synthesize_beat(schedule, {}, {}, cfg, rng);
    CHECK(beat.n_chirps == 6000);

    // phase excursion of the strongest range tone tracks chest motion
    const auto excursion = [&](double t0, double t1) {
        double lo = 1e9, hi = -1e9;
        for (std::int64_t t = std::int64_t(t0 * 50); t < std::int64_t(t1 * 50); ++t) {
            // demodulate at the target bin by a plain DFT coefficient
            std::complex<double> acc = 0;
            for (int k = 0; k < cfg.radar.samples_per_chirp; ++k) {
                const double ang = -2.0 * 3.14159265358979 * 20.0 * k / 256.0;
                acc += std::complex<double>(beat.chirp(t)[k]) *
                       std::polar(1.0, ang);
            }
            const double ph = std::arg(acc);
            lo = std::min(lo, ph);
            hi = std::max(hi, ph);
        }
        return hi - lo;
    };
    const double breathing = excursion(20.0, 40.0);
    const double apneic = excursion(70.0, 85.0);
    CHECK(apneic < 0.2 * breathing);
}

TEST_CASE("cohort config roundtrip") {
    sim::CohortConfig cfg;
    cfg.n_subjects = 6;
    cfg.benign_dip_rate_per_h = 3.0;
    cfg.seed = 1234;
    const auto path = std::filesystem::temp_directory_path() / "rosa_test_cohort.json";
    sim::save_cohort_config(cfg, path);
    const auto r = sim::load_cohort_config(path);
    CHECK(r.n_subjects == 6);
    CHECK(r.benign_dip_rate_per_h == 3.0);
    CHECK(r.seed == 1234);
    CHECK(r.groups[3].ahi_mean == doctest::Approx(57.2));
    std::filesystem::remove(path);
}
