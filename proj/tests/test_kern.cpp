#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rosa/kern/kernels.hpp"

using namespace rosa;

namespace {

template <class T>
std::vector<T> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<T> v(n);
    for (auto& x : v) x = T(u(rng));
    return v;
}

struct BackendGuard {
    ~BackendGuard() { kern::set_backend("auto"); }
};

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
    BackendGuard guard;
    kern::set_backend("scalar");
    std::mt19937_64 rng(11);
    for (std::size_t n : {std::size_t(1), std::size_t(7), std::size_t(64), std::size_t(1023)}) {
        const auto a = random_vec<double>(rng, n);
        const auto b = random_vec<double>(rng, n);
        double dot = 0, sum = 0, sq = 0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += a[i] * b[i];
            sum += a[i];
            sq += a[i] * a[i];
        }
        CHECK(kern::dot<double>(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-12));
        CHECK(kern::sum<double>(a.data(), n) == doctest::Approx(sum).epsilon(1e-12));
        CHECK(kern::sum_sq<double>(a.data(), n) == doctest::Approx(sq).epsilon(1e-12));
        auto y = b;
        kern::axpy<double>(0.5, a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(b[i] + 0.5 * a[i]));
        auto z = a;
        kern::scale<double>(-3.0, z.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(-3.0 * a[i]));
    }
}

TEST_CASE("avx2 backend agrees with the scalar reference") {
    if (!kern::avx2_supported()) return;
    BackendGuard guard;
    std::mt19937_64 rng(29);
    const auto& sc = kern::scalar_ops();
    const auto& vx = kern::avx2_ops();
    for (std::size_t n = 1; n <= 300; n += 7) {
        const auto a64 = random_vec<double>(rng, n);
        const auto b64 = random_vec<double>(rng, n);
        std::vector<float> a32(a64.begin(), a64.end()), b32(b64.begin(), b64.end());

        CHECK(vx.dot_f64(a64.data(), b64.data(), n) ==
              doctest::Approx(sc.dot_f64(a64.data(), b64.data(), n)).epsilon(1e-12));
        CHECK(vx.sum_f64(a64.data(), n) ==
              doctest::Approx(sc.sum_f64(a64.data(), n)).epsilon(1e-12));
        CHECK(vx.sum_sq_f64(a64.data(), n) ==
              doctest::Approx(sc.sum_sq_f64(a64.data(), n)).epsilon(1e-12));
        CHECK(double(vx.dot_f32(a32.data(), b32.data(), n)) ==
              doctest::Approx(double(sc.dot_f32(a32.data(), b32.data(), n))).epsilon(1e-4));
        CHECK(double(vx.sum_f32(a32.data(), n)) ==
              doctest::Approx(double(sc.sum_f32(a32.data(), n))).epsilon(1e-4));

        auto y_sc = b32, y_vx = b32;
        sc.axpy_f32(1.25f, a32.data(), y_sc.data(), n);
        vx.axpy_f32(1.25f, a32.data(), y_vx.data(), n);
        // FMA vs separate multiply-add: at most a rounding step apart
        for (std::size_t i = 0; i < n; ++i)
            CHECK(double(y_sc[i]) == doctest::Approx(double(y_vx[i])).epsilon(1e-6));
    }
}

TEST_CASE("axpy backends are exact per element") {
    // axpy has no reduction, so both backends perform the same single
    // fused multiply-add per element and must agree bit for bit in f64
    if (!kern::avx2_supported()) return;
    std::mt19937_64 rng(5);
    const std::size_t n = 257;
    const auto a = random_vec<double>(rng, n);
    const auto b = random_vec<double>(rng, n);
    auto y_sc = b, y_vx = b;
    kern::scalar_ops().axpy_f64(0.77, a.data(), y_sc.data(), n);
    kern::avx2_ops().axpy_f64(0.77, a.data(), y_vx.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y_sc[i] - y_vx[i]) <= 1e-15);
}

TEST_CASE("backend selection") {
    BackendGuard guard;
    kern::set_backend("scalar");
    CHECK(kern::backend_name() == "scalar");
    kern::set_backend("auto");
    if (kern::avx2_supported()) CHECK(kern::backend_name() == "avx2");
    CHECK_THROWS(kern::set_backend("neon"));
}

TEST_CASE("reductions are deterministic within a backend") {
    std::mt19937_64 rng(99);
    const auto a = random_vec<double>(rng, 1111);
    const double r1 = kern::active().sum_f64(a.data(), a.size());
    const double r2 = kern::active().sum_f64(a.data(), a.size());
    CHECK(r1 == r2);
}
