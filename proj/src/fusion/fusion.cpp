#include "rosa/fusion/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "rosa/metrics/metrics.hpp"

namespace rosa::fusion {

using nlohmann::json;

void FusionParams::validate() const {
    if (!(alpha >= 0 && alpha <= 1)) throw DataError("fusion: alpha must lie in [0, 1]");
    if (!(beta >= 0 && beta <= 1)) throw DataError("fusion: beta must lie in [0, 1]");
    if (!(t2 < t1)) throw DataError("fusion: t2 must be below t1");
    if (!(delta_t_s > 0)) throw DataError("fusion: delta_t must be positive");
}

void save_fusion_params(const FusionParams& p, const std::filesystem::path& file) {
    json j{{"alpha", p.alpha}, {"beta", p.beta},           {"t1", p.t1},
           {"t2", p.t2},       {"delta_t_s", p.delta_t_s}, {"decision_threshold", p.decision_threshold}};
    std::ofstream f(file);
    if (!f) throw DataError("cannot open for write: " + file.string());
    f << j.dump(2) << "\n";
}

FusionParams load_fusion_params(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw DataError("missing fusion params: " + file.string());
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw DataError("malformed fusion params: " + std::string(e.what()));
    }
    FusionParams p;
    p.alpha = j.value("alpha", p.alpha);
    p.beta = j.value("beta", p.beta);
    p.t1 = j.value("t1", p.t1);
    p.t2 = j.value("t2", p.t2);
    p.delta_t_s = j.value("delta_t_s", p.delta_t_s);
    p.decision_threshold = j.value("decision_threshold", p.decision_threshold);
    p.validate();
    return p;
}

namespace {

std::vector<double> median3(const std::vector<float>& x) {
    std::vector<double> m(x.size());
    if (x.empty()) return m;
    m.front() = x.front();
    m.back() = x.back();
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const float a = x[i - 1], b = x[i], c = x[i + 1];
        m[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
    }
    return m;
}

}  // namespace

SpO2Features extract_od_features(const SpO2Trace& s, double t_start_s, double delta_t_s) {
    if (t_start_s < 0) throw DataError("extract_od_features: t_start must be >= 0");
    const auto n = s.samples.size();
    const auto i0 = std::size_t(std::llround(t_start_s * s.sample_rate_hz));
    if (i0 >= n) return {0, 0, true};
    const auto i1 =
        std::min<std::size_t>(n, i0 + std::size_t(std::llround(delta_t_s * s.sample_rate_hz)));

    const std::vector<double> m = median3(s.samples);
    const auto rise_limit = std::size_t(std::llround(60.0 * s.sample_rate_hz));

    auto rise_after = [&](std::size_t nadir_idx) {
        // rise from the nadir to the next local maximum, searched up to
        // 60 s past the nadir (beyond the window if needed)
        const double nadir = m[nadir_idx];
        double best = 0;
        const std::size_t stop = std::min(n, nadir_idx + rise_limit + 1);
        for (std::size_t j = nadir_idx + 1; j < stop; ++j) {
            best = std::max(best, m[j] - nadir);
            if (j + 1 < stop && m[j + 1] < m[j] && m[j] - nadir == best) break;
        }
        return best;
    };

    SpO2Features out;
    double max_drop = 0;
    std::size_t max_drop_nadir = i0;
    std::size_t i = i0;
    while (i + 1 < i1) {
        while (i + 1 < i1 && m[i + 1] >= m[i]) ++i;  // climb to a local max
        const double peak = m[i];
        std::size_t j = i;
        std::size_t nadir = i;  // first sample of the lowest plateau
        while (j + 1 < i1 && m[j + 1] <= m[j]) {
            ++j;  // descend to the nadir
            if (m[j] < m[nadir]) nadir = j;
        }
        if (j == i) break;
        const double drop = peak - m[j];
        if (drop >= 3.0) {
            out.p_d = drop;
            out.p_r = rise_after(nadir);
            return out;
        }
        if (drop > max_drop) {
            max_drop = drop;
            max_drop_nadir = nadir;
        }
        i = j;
    }
    // no qualifying desaturation: fall back to the maximum drop
    out.p_d = max_drop;
    out.p_r = max_drop > 0 ? rise_after(max_drop_nadir) : 0.0;
    return out;
}

double fuse_score(double p, const SpO2Features& f, const FusionParams& params) {
    params.validate();
    // the increase branch is checked first, so it wins any overlap
    if (f.p_d >= params.t1 || f.p_r >= params.t1) return params.alpha * p + (1.0 - params.alpha);
    if (f.p_d < params.t2 && f.p_r < params.t2) return params.beta * p;
    return p;
}

FusedDetections fuse_session(const std::vector<DetectedSegment>& detections, const SpO2Trace& s,
                             const FusionParams& params) {
    params.validate();
    FusedDetections out;
    for (auto d : detections) {
        d.validate();
        const auto f = extract_od_features(s, d.t_start_s, params.delta_t_s);
        d.score = fuse_score(d.score, f, params);
        out.all.push_back(d);
        if (d.score >= params.decision_threshold) out.accepted.push_back(d);
    }
    return out;
}

FusionParams grid_search_thresholds(const std::vector<GridSearchInput>& sessions,
                                    const std::vector<double>& t1_grid,
                                    const std::vector<double>& t2_grid,
                                    const FusionParams& base) {
    if (sessions.size() < 2)
        throw DataError("grid search: need at least two sessions");
    {
        bool distinct = false;
        for (const auto& s : sessions)
            if (s.true_ahi != sessions.front().true_ahi) distinct = true;
        if (!distinct) throw DataError("grid search: ICC undefined for identical true AHI");
    }

    // precompute features once per detection; the grid only moves thresholds
    std::vector<std::vector<std::pair<double, SpO2Features>>> feats(sessions.size());
    for (std::size_t s = 0; s < sessions.size(); ++s)
        for (const auto& d : sessions[s].detections)
            feats[s].emplace_back(d.score,
                                  extract_od_features(sessions[s].spo2, d.t_start_s, base.delta_t_s));

    bool found = false;
    FusionParams best = base;
    double best_icc = -2;
    for (double t1 : t1_grid) {
        for (double t2 : t2_grid) {
            if (!(t2 < t1)) continue;
            FusionParams p = base;
            p.t1 = t1;
            p.t2 = t2;
            std::vector<std::pair<double, double>> pairs;
            for (std::size_t s = 0; s < sessions.size(); ++s) {
                std::size_t counted = 0;
                for (const auto& [score, f] : feats[s])
                    if (fuse_score(score, f, p) >= p.decision_threshold) ++counted;
                pairs.emplace_back(sessions[s].true_ahi,
                                   metrics::compute_ahi(counted, sessions[s].tst_h));
            }
            const auto icc = metrics::icc21(pairs);
            const double v = icc.value_or(-1);  // degenerate estimates rank last
            if (!found || v > best_icc) {
                found = true;
                best_icc = v;
                best = p;
            }
            // ties: grids are iterated in ascending (t1, t2) order, so the
            // first maximum already is the lexicographically smallest pair
        }
    }
    if (!found) throw DataError("grid search: no feasible (t1, t2) pair");
    return best;
}

std::vector<double> default_t1_grid() {
    std::vector<double> g;
    for (double v = 2.0; v <= 8.0 + 1e-9; v += 0.5) g.push_back(v);
    return g;
}

std::vector<double> default_t2_grid() {
    std::vector<double> g;
    for (double v = 0.5; v <= 4.0 + 1e-9; v += 0.5) g.push_back(v);
    return g;
}

}  // namespace rosa::fusion
