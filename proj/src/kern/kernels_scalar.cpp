#include "rosa/kern/kernels.hpp"

namespace rosa::kern {
namespace {

template <class T>
T dot_ref(const T* a, const T* b, std::size_t n) {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

template <class T>
void axpy_ref(T a, const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class T>
void scale_ref(T a, T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

template <class T>
T sum_ref(const T* x, std::size_t n) {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

template <class T>
T sum_sq_ref(const T* x, std::size_t n) {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        "scalar",
        dot_ref<float>,  axpy_ref<float>,  scale_ref<float>,
        sum_ref<float>,  sum_sq_ref<float>,
        dot_ref<double>, axpy_ref<double>, scale_ref<double>,
        sum_ref<double>, sum_sq_ref<double>,
    };
    return ops;
}

}  // namespace rosa::kern
