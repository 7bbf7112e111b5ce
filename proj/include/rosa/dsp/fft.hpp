#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::dsp {

// In-place iterative radix-2 FFT. Length must be a power of two.
template <class T>
void fft_inplace(std::span<std::complex<T>> x) {
    const std::size_t n = x.size();
    if (n == 0 || !std::has_single_bit(n)) throw DataError("fft: length must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const T ang = T(-2) * std::numbers::pi_v<T> / T(len);
        const std::complex<T> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<T> w(1);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<T> u = x[i + k];
                const std::complex<T> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Brute-force DFT coefficient, used as the test oracle.
template <class T>
std::complex<T> dft_coefficient(std::span<const std::complex<T>> x, std::size_t k) {
    std::complex<T> acc(0);
    const T w = T(-2) * std::numbers::pi_v<T> * T(k) / T(x.size());
    for (std::size_t n = 0; n < x.size(); ++n)
        acc += x[n] * std::complex<T>(std::cos(w * T(n)), std::sin(w * T(n)));
    return acc;
}

inline std::vector<float> hann_window(int n) {
    std::vector<float> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = 0.5f - 0.5f * std::cos(2.0 * std::numbers::pi * i / n);
    return w;
}

}  // namespace rosa::dsp
