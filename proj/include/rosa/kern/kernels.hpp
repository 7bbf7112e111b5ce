#pragma once

#include <cstddef>
#include <string_view>

namespace rosa::kern {

// Flat vector kernels used by the DSP and network inner loops.
// Two backends: a scalar reference and an AVX2 variant, selected at
// runtime. Results may differ between backends by normal floating-point
// reassociation; within a backend they are deterministic.
struct Ops {
    const char* name;

    float (*dot_f32)(const float* a, const float* b, std::size_t n);
    void (*axpy_f32)(float a, const float* x, float* y, std::size_t n);
    void (*scale_f32)(float a, float* x, std::size_t n);
    float (*sum_f32)(const float* x, std::size_t n);
    float (*sum_sq_f32)(const float* x, std::size_t n);

    double (*dot_f64)(const double* a, const double* b, std::size_t n);
    void (*axpy_f64)(double a, const double* x, double* y, std::size_t n);
    void (*scale_f64)(double a, double* x, std::size_t n);
    double (*sum_f64)(const double* x, std::size_t n);
    double (*sum_sq_f64)(const double* x, std::size_t n);
};

const Ops& scalar_ops();
const Ops& avx2_ops();  // valid only if avx2_supported()
bool avx2_supported();

// active() starts on the best supported backend; set_backend("scalar"),
// ("avx2") or ("auto") overrides it (tests, CLI flag).
const Ops& active();
void set_backend(std::string_view name);
std::string_view backend_name();

// type-dispatched helpers so templated callers stay readable
template <class T>
T dot(const T* a, const T* b, std::size_t n);
template <class T>
void axpy(T a, const T* x, T* y, std::size_t n);
template <class T>
void scale(T a, T* x, std::size_t n);
template <class T>
T sum(const T* x, std::size_t n);
template <class T>
T sum_sq(const T* x, std::size_t n);

template <>
inline float dot<float>(const float* a, const float* b, std::size_t n) {
    return active().dot_f32(a, b, n);
}
template <>
inline double dot<double>(const double* a, const double* b, std::size_t n) {
    return active().dot_f64(a, b, n);
}
template <>
inline void axpy<float>(float a, const float* x, float* y, std::size_t n) {
    active().axpy_f32(a, x, y, n);
}
template <>
inline void axpy<double>(double a, const double* x, double* y, std::size_t n) {
    active().axpy_f64(a, x, y, n);
}
template <>
inline void scale<float>(float a, float* x, std::size_t n) {
    active().scale_f32(a, x, n);
}
template <>
inline void scale<double>(double a, double* x, std::size_t n) {
    active().scale_f64(a, x, n);
}
template <>
inline float sum<float>(const float* x, std::size_t n) {
    return active().sum_f32(x, n);
}
template <>
inline double sum<double>(const double* x, std::size_t n) {
    return active().sum_f64(x, n);
}
template <>
inline float sum_sq<float>(const float* x, std::size_t n) {
    return active().sum_sq_f32(x, n);
}
template <>
inline double sum_sq<double>(const double* x, std::size_t n) {
    return active().sum_sq_f64(x, n);
}

}  // namespace rosa::kern
