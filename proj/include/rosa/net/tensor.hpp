#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <numeric>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::net {

// Dense row-major tensor. Small by design: the layers below index it
// explicitly, so only shape bookkeeping lives here.
template <class T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(count(shape), T(0)) {}

    static std::size_t count(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d < 0) throw DataError("tensor: negative dimension");
            n *= std::size_t(d);
        }
        return n;
    }

    std::size_t size() const { return v.size(); }
    int dim(int i) const { return shape[std::size_t(i)]; }
    T* data() { return v.data(); }
    const T* data() const { return v.data(); }
    void zero() { std::fill(v.begin(), v.end(), T(0)); }

    // 2D (c, l)
    T* row(int c, int l_len) { return v.data() + std::size_t(c) * l_len; }
    const T* row(int c, int l_len) const { return v.data() + std::size_t(c) * l_len; }
};

// parameter with its gradient accumulator
template <class T>
struct Param {
    Tensor<T> w;
    Tensor<T> g;

    explicit Param(std::vector<int> shape) : w(shape), g(std::move(shape)) {}
    Param() = default;
};

}  // namespace rosa::net
