#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rosa/net/model.hpp"

using namespace rosa::net;

namespace {

// tiny double-precision instantiation: central finite differences over a
// sample of entries from every parameter tensor
struct GradCheck {
    RasaModel<double> model;
    Tensor<double> x;
    std::vector<Segment> gts{{10, 42}, {45, 62}};
    std::vector<int> classes{2, 4};
    std::vector<Segment> fixed_props{{8, 40}, {20, 52}, {44, 63}, {0, 30}, {50, 62}};

    explicit GradCheck(ArchConfig arch) : model(arch), x({3, 6, 64}) {
        model.init(17);
        std::mt19937_64 rng(23);
        std::normal_distribution<double> g(0.0, 1.0);
        for (auto& v : x.v) v = g(rng);
        // jitter every parameter (biases start at exactly zero, which
        // parks boundary units on the ReLU kink and breaks central
        // differences there)
        std::uniform_real_distribution<double> u(-0.05, 0.05);
        for (auto& [name, p] : model.params())
            for (auto& v : p->w.v) v += u(rng);
    }

    double loss() {
        model.zero_grad();
        return model.train_step(x, gts, classes, &fixed_props).total;
    }

    // worst relative error across sampled entries of one parameter
    double check_param(Param<double>& p, std::mt19937_64& rng, int samples) {
        model.zero_grad();
        model.train_step(x, gts, classes, &fixed_props);
        const Tensor<double> analytic = p.g;
        double worst = 0;
        const double eps = 1e-6;
        for (int s = 0; s < samples; ++s) {
            const std::size_t j = rng() % p.w.size();
            const double keep = p.w.v[j];
            p.w.v[j] = keep + eps;
            const double up = loss();
            p.w.v[j] = keep - eps;
            const double dn = loss();
            p.w.v[j] = keep;
            const double numeric = (up - dn) / (2.0 * eps);
            const double denom = std::max(std::abs(analytic.v[j]) + std::abs(numeric), 1e-4);
            worst = std::max(worst, std::abs(analytic.v[j] - numeric) / denom);
        }
        return worst;
    }
};

ArchConfig tiny_arch() {
    ArchConfig a;
    a.width = 4;
    a.head_hidden = 8;
    return a;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences") {
    GradCheck gc(tiny_arch());
    std::mt19937_64 rng(31);
    for (auto& [name, p] : gc.model.params()) {
        const int samples = p->w.size() > 16 ? 6 : int(p->w.size());
        const double worst = gc.check_param(*p, rng, samples);
        INFO("parameter ", name);
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("gradients flow through the max range pool too") {
    auto arch = tiny_arch();
    arch.max_range_pool = true;
    GradCheck gc(arch);
    std::mt19937_64 rng(37);
    for (auto& [name, p] : gc.model.params()) {
        if (p->w.size() == 0) continue;
        const double worst = gc.check_param(*p, rng, 4);
        INFO("parameter ", name);
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("loss is finite and positive at init") {
    GradCheck gc(tiny_arch());
    const double l = gc.loss();
    CHECK(std::isfinite(l));
    CHECK(l > 0.0);
}
