#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "rosa/kern/kernels.hpp"
#include "rosa/net/tensor.hpp"

namespace rosa::net {

// Layers are stateless with respect to activations: forward returns the
// output, backward takes the forward input (or output, for ReLU) again.
// Parameter gradients accumulate until the optimizer clears them.

template <class T>
void he_init(Tensor<T>& w, std::size_t fan_in, std::mt19937_64& rng) {
    const double sd = std::sqrt(2.0 / double(fan_in));
    for (auto& v : w.v) {
        // Box-Muller, same generator contract as the simulator
        double u = 0;
        do {
            u = double(rng() >> 11) * 0x1.0p-53;
        } while (u <= 0);
        const double ang = double(rng() >> 11) * 0x1.0p-53;
        v = T(sd * std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * ang));
    }
}

template <class T>
struct ReLU {
    Tensor<T> forward(const Tensor<T>& x) const {
        Tensor<T> y = x;
        for (auto& v : y.v) v = std::max(v, T(0));
        return y;
    }
    void backward(const Tensor<T>& y, const Tensor<T>& dy, Tensor<T>& dx) const {
        if (dx.v.empty()) dx = Tensor<T>(y.shape);
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y.v[i] > T(0)) dx.v[i] += dy.v[i];
    }
};

// 2D conv over (range, time): kernel (3, 2), stride (1, 2), range pad 1.
// L_out = floor(L / 2). The time axis is processed in polyphase form so
// the inner loops are contiguous axpy/dot.
template <class T>
struct Conv2dStride2 {
    int c_in = 0, c_out = 0;
    Param<T> w;  // (c_out, c_in, 3, 2)
    Param<T> b;  // (c_out)

    Conv2dStride2() = default;
    Conv2dStride2(int ci, int co)
        : c_in(ci), c_out(co), w({co, ci, 3, 2}), b({co}) {}

    void init(std::mt19937_64& rng) { he_init(w.w, std::size_t(c_in) * 6, rng); }

    T wv(int oc, int c, int dr, int ph) const {
        return w.w.v[((std::size_t(oc) * c_in + c) * 3 + dr) * 2 + ph];
    }
    T& gw(int oc, int c, int dr, int ph) {
        return w.g.v[((std::size_t(oc) * c_in + c) * 3 + dr) * 2 + ph];
    }

    // x: (c_in, H, L) -> y: (c_out, H, L/2)
    Tensor<T> forward(const Tensor<T>& x) const {
        const int h = x.dim(1), l = x.dim(2), lo = l / 2;
        Tensor<T> y({c_out, h, lo});
        for (int oc = 0; oc < c_out; ++oc) {
            T* yc = y.data() + std::size_t(oc) * h * lo;
            for (std::size_t i = 0; i < std::size_t(h) * lo; ++i) yc[i] = b.w.v[oc];
        }
        std::vector<T> ph0(lo), ph1(lo);
        for (int c = 0; c < c_in; ++c) {
            for (int ri = 0; ri < h; ++ri) {
                const T* xr = x.data() + (std::size_t(c) * h + ri) * l;
                for (int t = 0; t < lo; ++t) {
                    ph0[t] = xr[2 * t];
                    ph1[t] = xr[2 * t + 1];
                }
                for (int dr = 0; dr < 3; ++dr) {
                    const int r = ri - (dr - 1);
                    if (r < 0 || r >= h) continue;
                    for (int oc = 0; oc < c_out; ++oc) {
                        T* yr = y.data() + (std::size_t(oc) * h + r) * lo;
                        kern::axpy<T>(wv(oc, c, dr, 0), ph0.data(), yr, std::size_t(lo));
                        kern::axpy<T>(wv(oc, c, dr, 1), ph1.data(), yr, std::size_t(lo));
                    }
                }
            }
        }
        return y;
    }

    void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
        const int h = x.dim(1), l = x.dim(2), lo = l / 2;
        if (dx.v.empty()) dx = Tensor<T>(x.shape);
        for (int oc = 0; oc < c_out; ++oc) {
            const T* dyc = dy.data() + std::size_t(oc) * h * lo;
            b.g.v[oc] += kern::sum<T>(dyc, std::size_t(h) * lo);
        }
        std::vector<T> ph0(lo), ph1(lo), g0(lo), g1(lo);
        for (int c = 0; c < c_in; ++c) {
            for (int ri = 0; ri < h; ++ri) {
                const T* xr = x.data() + (std::size_t(c) * h + ri) * l;
                for (int t = 0; t < lo; ++t) {
                    ph0[t] = xr[2 * t];
                    ph1[t] = xr[2 * t + 1];
                }
                std::fill(g0.begin(), g0.end(), T(0));
                std::fill(g1.begin(), g1.end(), T(0));
                for (int dr = 0; dr < 3; ++dr) {
                    const int r = ri - (dr - 1);
                    if (r < 0 || r >= h) continue;
                    for (int oc = 0; oc < c_out; ++oc) {
                        const T* dyr = dy.data() + (std::size_t(oc) * h + r) * lo;
                        gw(oc, c, dr, 0) += kern::dot<T>(ph0.data(), dyr, std::size_t(lo));
                        gw(oc, c, dr, 1) += kern::dot<T>(ph1.data(), dyr, std::size_t(lo));
                        kern::axpy<T>(wv(oc, c, dr, 0), dyr, g0.data(), std::size_t(lo));
                        kern::axpy<T>(wv(oc, c, dr, 1), dyr, g1.data(), std::size_t(lo));
                    }
                }
                T* dxr = dx.data() + (std::size_t(c) * h + ri) * l;
                for (int t = 0; t < lo; ++t) {
                    dxr[2 * t] += g0[t];
                    dxr[2 * t + 1] += g1[t];
                }
            }
        }
    }
};

// 2D conv (3, 3), stride 1, pad (1, 1)
template <class T>
struct Conv2dSame {
    int c_in = 0, c_out = 0;
    Param<T> w;  // (c_out, c_in, 3, 3)
    Param<T> b;

    Conv2dSame() = default;
    Conv2dSame(int ci, int co) : c_in(ci), c_out(co), w({co, ci, 3, 3}), b({co}) {}

    void init(std::mt19937_64& rng) { he_init(w.w, std::size_t(c_in) * 9, rng); }

    T wv(int oc, int c, int dr, int dt) const {
        return w.w.v[((std::size_t(oc) * c_in + c) * 3 + dr) * 3 + dt];
    }
    T& gw(int oc, int c, int dr, int dt) {
        return w.g.v[((std::size_t(oc) * c_in + c) * 3 + dr) * 3 + dt];
    }

    Tensor<T> forward(const Tensor<T>& x) const {
        const int h = x.dim(1), l = x.dim(2);
        Tensor<T> y({c_out, h, l});
        for (int oc = 0; oc < c_out; ++oc) {
            T* yc = y.data() + std::size_t(oc) * h * l;
            for (std::size_t i = 0; i < std::size_t(h) * l; ++i) yc[i] = b.w.v[oc];
        }
        for (int c = 0; c < c_in; ++c) {
            for (int ri = 0; ri < h; ++ri) {
                const T* xr = x.data() + (std::size_t(c) * h + ri) * l;
                for (int dr = 0; dr < 3; ++dr) {
                    const int r = ri - (dr - 1);
                    if (r < 0 || r >= h) continue;
                    for (int oc = 0; oc < c_out; ++oc) {
                        T* yr = y.data() + (std::size_t(oc) * h + r) * l;
                        for (int dt = 0; dt < 3; ++dt) {
                            const int off = dt - 1;  // y[t] += w * x[t + off]
                            const int t0 = std::max(0, -off);
                            const int t1 = std::min(l, l - off);
                            if (t1 <= t0) continue;
                            kern::axpy<T>(wv(oc, c, dr, dt), xr + t0 + off, yr + t0,
                                          std::size_t(t1 - t0));
                        }
                    }
                }
            }
        }
        return y;
    }

    void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
        const int h = x.dim(1), l = x.dim(2);
        if (dx.v.empty()) dx = Tensor<T>(x.shape);
        for (int oc = 0; oc < c_out; ++oc)
            b.g.v[oc] += kern::sum<T>(dy.data() + std::size_t(oc) * h * l, std::size_t(h) * l);
        for (int c = 0; c < c_in; ++c) {
            for (int ri = 0; ri < h; ++ri) {
                const T* xr = x.data() + (std::size_t(c) * h + ri) * l;
                T* dxr = dx.data() + (std::size_t(c) * h + ri) * l;
                for (int dr = 0; dr < 3; ++dr) {
                    const int r = ri - (dr - 1);
                    if (r < 0 || r >= h) continue;
                    for (int oc = 0; oc < c_out; ++oc) {
                        const T* dyr = dy.data() + (std::size_t(oc) * h + r) * l;
                        for (int dt = 0; dt < 3; ++dt) {
                            const int off = dt - 1;
                            const int t0 = std::max(0, -off);
                            const int t1 = std::min(l, l - off);
                            if (t1 <= t0) continue;
                            gw(oc, c, dr, dt) +=
                                kern::dot<T>(xr + t0 + off, dyr + t0, std::size_t(t1 - t0));
                            kern::axpy<T>(wv(oc, c, dr, dt), dyr + t0, dxr + t0 + off,
                                          std::size_t(t1 - t0));
                        }
                    }
                }
            }
        }
    }
};

// 1D conv kernel 3, stride 1, pad 1
template <class T>
struct Conv1dSame {
    int c_in = 0, c_out = 0;
    Param<T> w;  // (c_out, c_in, 3)
    Param<T> b;

    Conv1dSame() = default;
    Conv1dSame(int ci, int co) : c_in(ci), c_out(co), w({co, ci, 3}), b({co}) {}

    void init(std::mt19937_64& rng) { he_init(w.w, std::size_t(c_in) * 3, rng); }

    T wv(int oc, int c, int dt) const { return w.w.v[(std::size_t(oc) * c_in + c) * 3 + dt]; }
    T& gw(int oc, int c, int dt) { return w.g.v[(std::size_t(oc) * c_in + c) * 3 + dt]; }

    Tensor<T> forward(const Tensor<T>& x) const {
        const int l = x.dim(1);
        Tensor<T> y({c_out, l});
        for (int oc = 0; oc < c_out; ++oc) {
            T* yr = y.row(oc, l);
            for (int t = 0; t < l; ++t) yr[t] = b.w.v[oc];
            for (int c = 0; c < c_in; ++c) {
                const T* xr = x.row(c, l);
                for (int dt = 0; dt < 3; ++dt) {
                    const int off = dt - 1;
                    const int t0 = std::max(0, -off);
                    const int t1 = std::min(l, l - off);
                    if (t1 <= t0) continue;
                    kern::axpy<T>(wv(oc, c, dt), xr + t0 + off, yr + t0, std::size_t(t1 - t0));
                }
            }
        }
        return y;
    }

    void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
        const int l = x.dim(1);
        if (dx.v.empty()) dx = Tensor<T>(x.shape);
        for (int oc = 0; oc < c_out; ++oc) {
            const T* dyr = dy.row(oc, l);
            b.g.v[oc] += kern::sum<T>(dyr, std::size_t(l));
            for (int c = 0; c < c_in; ++c) {
                const T* xr = x.row(c, l);
                T* dxr = dx.row(c, l);
                for (int dt = 0; dt < 3; ++dt) {
                    const int off = dt - 1;
                    const int t0 = std::max(0, -off);
                    const int t1 = std::min(l, l - off);
                    if (t1 <= t0) continue;
                    gw(oc, c, dt) += kern::dot<T>(xr + t0 + off, dyr + t0, std::size_t(t1 - t0));
                    kern::axpy<T>(wv(oc, c, dt), dyr + t0, dxr + t0 + off, std::size_t(t1 - t0));
                }
            }
        }
    }
};

// 1D downsampling conv: kernel 2, stride 2, no pad; L_out = floor(L / 2)
template <class T>
struct Conv1dDown {
    int c_in = 0, c_out = 0;
    Param<T> w;  // (c_out, c_in, 2)
    Param<T> b;

    Conv1dDown() = default;
    Conv1dDown(int ci, int co) : c_in(ci), c_out(co), w({co, ci, 2}), b({co}) {}

    void init(std::mt19937_64& rng) { he_init(w.w, std::size_t(c_in) * 2, rng); }

    T wv(int oc, int c, int ph) const { return w.w.v[(std::size_t(oc) * c_in + c) * 2 + ph]; }
    T& gw(int oc, int c, int ph) { return w.g.v[(std::size_t(oc) * c_in + c) * 2 + ph]; }

    Tensor<T> forward(const Tensor<T>& x) const {
        const int l = x.dim(1), lo = l / 2;
        Tensor<T> y({c_out, lo});
        std::vector<T> ph0(lo), ph1(lo);
        for (int c = 0; c < c_in; ++c) {
            const T* xr = x.row(c, l);
            for (int t = 0; t < lo; ++t) {
                ph0[t] = xr[2 * t];
                ph1[t] = xr[2 * t + 1];
            }
            for (int oc = 0; oc < c_out; ++oc) {
                T* yr = y.row(oc, lo);
                if (c == 0)
                    for (int t = 0; t < lo; ++t) yr[t] = b.w.v[oc];
                kern::axpy<T>(wv(oc, c, 0), ph0.data(), yr, std::size_t(lo));
                kern::axpy<T>(wv(oc, c, 1), ph1.data(), yr, std::size_t(lo));
            }
        }
        return y;
    }

    void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
        const int l = x.dim(1), lo = l / 2;
        if (dx.v.empty()) dx = Tensor<T>(x.shape);
        std::vector<T> ph0(lo), ph1(lo), g0(lo), g1(lo);
        for (int oc = 0; oc < c_out; ++oc)
            b.g.v[oc] += kern::sum<T>(dy.row(oc, lo), std::size_t(lo));
        for (int c = 0; c < c_in; ++c) {
            const T* xr = x.row(c, l);
            for (int t = 0; t < lo; ++t) {
                ph0[t] = xr[2 * t];
                ph1[t] = xr[2 * t + 1];
            }
            std::fill(g0.begin(), g0.end(), T(0));
            std::fill(g1.begin(), g1.end(), T(0));
            for (int oc = 0; oc < c_out; ++oc) {
                const T* dyr = dy.row(oc, lo);
                gw(oc, c, 0) += kern::dot<T>(ph0.data(), dyr, std::size_t(lo));
                gw(oc, c, 1) += kern::dot<T>(ph1.data(), dyr, std::size_t(lo));
                kern::axpy<T>(wv(oc, c, 0), dyr, g0.data(), std::size_t(lo));
                kern::axpy<T>(wv(oc, c, 1), dyr, g1.data(), std::size_t(lo));
            }
            T* dxr = dx.row(c, l);
            for (int t = 0; t < lo; ++t) {
                dxr[2 * t] += g0[t];
                dxr[2 * t + 1] += g1[t];
            }
        }
    }
};

// pointwise 1D conv (the SPN output heads)
template <class T>
struct Conv1x1 {
    int c_in = 0, c_out = 0;
    Param<T> w;  // (c_out, c_in)
    Param<T> b;

    Conv1x1() = default;
    Conv1x1(int ci, int co) : c_in(ci), c_out(co), w({co, ci}), b({co}) {}

    void init(std::mt19937_64& rng) { he_init(w.w, std::size_t(c_in), rng); }

    Tensor<T> forward(const Tensor<T>& x) const {
        const int l = x.dim(1);
        Tensor<T> y({c_out, l});
        for (int oc = 0; oc < c_out; ++oc) {
            T* yr = y.row(oc, l);
            for (int t = 0; t < l; ++t) yr[t] = b.w.v[oc];
            for (int c = 0; c < c_in; ++c)
                kern::axpy<T>(w.w.v[std::size_t(oc) * c_in + c], x.row(c, l), yr, std::size_t(l));
        }
        return y;
    }

    void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
        const int l = x.dim(1);
        if (dx.v.empty()) dx = Tensor<T>(x.shape);
        for (int oc = 0; oc < c_out; ++oc) {
            const T* dyr = dy.row(oc, l);
            b.g.v[oc] += kern::sum<T>(dyr, std::size_t(l));
            for (int c = 0; c < c_in; ++c) {
                w.g.v[std::size_t(oc) * c_in + c] += kern::dot<T>(x.row(c, l), dyr, std::size_t(l));
                kern::axpy<T>(w.w.v[std::size_t(oc) * c_in + c], dyr, dx.row(c, l),
                              std::size_t(l));
            }
        }
    }
};

// mean (or max) reduction over the range axis: (C, H, L) -> (C, L)
template <class T>
struct RangePool {
    bool use_max = false;
    mutable std::vector<int> argmax;  // cached by forward when use_max

    Tensor<T> forward(const Tensor<T>& x) const {
        const int c_n = x.dim(0), h = x.dim(1), l = x.dim(2);
        Tensor<T> y({c_n, l});
        if (use_max) argmax.assign(std::size_t(c_n) * l, 0);
        for (int c = 0; c < c_n; ++c) {
            T* yr = y.row(c, l);
            if (use_max) {
                for (int t = 0; t < l; ++t) {
                    T best = x.v[(std::size_t(c) * h) * l + t];
                    int best_r = 0;
                    for (int r = 1; r < h; ++r) {
                        const T v = x.v[(std::size_t(c) * h + r) * l + t];
                        if (v > best) {
                            best = v;
                            best_r = r;
                        }
                    }
                    yr[t] = best;
                    argmax[std::size_t(c) * l + t] = best_r;
                }
            } else {
                for (int r = 0; r < h; ++r)
                    kern::axpy<T>(T(1), x.data() + (std::size_t(c) * h + r) * l, yr,
                                  std::size_t(l));
                kern::scale<T>(T(1) / T(h), yr, std::size_t(l));
            }
        }
        return y;
    }

    void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) const {
        const int c_n = x.dim(0), h = x.dim(1), l = x.dim(2);
        if (dx.v.empty()) dx = Tensor<T>(x.shape);
        for (int c = 0; c < c_n; ++c) {
            const T* dyr = dy.row(c, l);
            if (use_max) {
                for (int t = 0; t < l; ++t)
                    dx.v[(std::size_t(c) * h + argmax[std::size_t(c) * l + t]) * l + t] += dyr[t];
            } else {
                for (int r = 0; r < h; ++r)
                    kern::axpy<T>(T(1) / T(h), dyr, dx.data() + (std::size_t(c) * h + r) * l,
                                  std::size_t(l));
            }
        }
    }
};

// fully connected over a batch of pooled proposals: (P, in) -> (P, out)
template <class T>
struct Linear {
    int n_in = 0, n_out = 0;
    Param<T> w;  // (out, in)
    Param<T> b;

    Linear() = default;
    Linear(int ni, int no) : n_in(ni), n_out(no), w({no, ni}), b({no}) {}

    void init(std::mt19937_64& rng) { he_init(w.w, std::size_t(n_in), rng); }

    Tensor<T> forward(const Tensor<T>& x) const {
        const int p = x.dim(0);
        Tensor<T> y({p, n_out});
        for (int i = 0; i < p; ++i) {
            const T* xi = x.row(i, n_in);
            T* yi = y.row(i, n_out);
            for (int o = 0; o < n_out; ++o)
                yi[o] = b.w.v[o] + kern::dot<T>(w.w.data() + std::size_t(o) * n_in, xi,
                                                std::size_t(n_in));
        }
        return y;
    }

    void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
        const int p = x.dim(0);
        if (dx.v.empty()) dx = Tensor<T>(x.shape);
        for (int i = 0; i < p; ++i) {
            const T* xi = x.row(i, n_in);
            const T* dyi = dy.row(i, n_out);
            T* dxi = dx.row(i, n_in);
            for (int o = 0; o < n_out; ++o) {
                b.g.v[o] += dyi[o];
                kern::axpy<T>(dyi[o], xi, w.g.data() + std::size_t(o) * n_in, std::size_t(n_in));
                kern::axpy<T>(dyi[o], w.w.data() + std::size_t(o) * n_in, dxi, std::size_t(n_in));
            }
        }
    }
};

// 1D RoIAlign: the segment (feature coordinates) is split into out_size
// equal cells, each sampled at its center by linear interpolation between
// values at bin centers r + 0.5.
template <class T>
void roi_align_1d(const Tensor<T>& feature, double start, double end, int out_size,
                  Tensor<T>& out) {
    const int c_n = feature.dim(0), l = feature.dim(1);
    if (!(end > start)) throw DataError("roi_align: degenerate segment");
    out = Tensor<T>({c_n, out_size});
    const double cell = (end - start) / out_size;
    for (int k = 0; k < out_size; ++k) {
        const double u = start + (k + 0.5) * cell - 0.5;  // bin-center coordinates
        const double uc = std::clamp(u, 0.0, double(l - 1));
        const int i0 = std::min(int(std::floor(uc)), l - 1);
        const int i1 = std::min(i0 + 1, l - 1);
        const T frac = T(uc - i0);
        for (int c = 0; c < c_n; ++c)
            out.v[std::size_t(c) * out_size + k] = (T(1) - frac) * feature.row(c, l)[i0] +
                                                   frac * feature.row(c, l)[i1];
    }
}

template <class T>
void roi_align_1d_backward(const Tensor<T>& dout, double start, double end, int out_size,
                           Tensor<T>& dfeature) {
    const int c_n = dfeature.dim(0), l = dfeature.dim(1);
    const double cell = (end - start) / out_size;
    for (int k = 0; k < out_size; ++k) {
        const double u = start + (k + 0.5) * cell - 0.5;
        const double uc = std::clamp(u, 0.0, double(l - 1));
        const int i0 = std::min(int(std::floor(uc)), l - 1);
        const int i1 = std::min(i0 + 1, l - 1);
        const T frac = T(uc - i0);
        for (int c = 0; c < c_n; ++c) {
            const T g = dout.v[std::size_t(c) * out_size + k];
            dfeature.row(c, l)[i0] += (T(1) - frac) * g;
            dfeature.row(c, l)[i1] += frac * g;
        }
    }
}

}  // namespace rosa::net
