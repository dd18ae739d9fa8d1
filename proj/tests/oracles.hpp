#pragma once

// Test-only reference routines and generators, kept independent of the
// packed/blocked code paths they check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "convgemm/conv_params.hpp"
#include "convgemm/tensor.hpp"

namespace testutil {

using convgemm::ConvParams;
using convgemm::index_t;
using convgemm::MatrixView;
using convgemm::Tensor4;

// C += A * B the obvious way, accumulating in double.
inline void naive_gemm(MatrixView<const double> A, MatrixView<const double> B,
                       MatrixView<double> C) {
    for (index_t j = 0; j < C.cols; ++j) {
        for (index_t i = 0; i < C.rows; ++i) {
            double acc = 0.0;
            for (index_t p = 0; p < A.cols; ++p)
                acc += A(i, p) * B(p, j);
            C(i, j) += acc;
        }
    }
}

// max |a-b| scaled by max(1, max|ref|): a normalized residual that stays
// meaningful when individual elements cancel toward zero.
template <typename T, typename U>
double normalized_max_error(const T* a, const U* ref, index_t n) {
    double scale = 1.0;
    double diff = 0.0;
    for (index_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::fabs(static_cast<double>(ref[i])));
        diff = std::max(diff, std::fabs(static_cast<double>(a[i]) -
                                        static_cast<double>(ref[i])));
    }
    return diff / scale;
}

template <typename T>
void fill_uniform(T* p, index_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (index_t i = 0; i < n; ++i)
        p[i] = static_cast<T>(dist(rng));
}

template <typename T>
Tensor4<T> random_tensor(index_t d0, index_t d1, index_t d2, index_t d3,
                         std::mt19937_64& rng) {
    Tensor4<T> t(d0, d1, d2, d3);
    fill_uniform(t.data(), t.size(), rng);
    return t;
}

template <typename T>
std::vector<T> random_matrix(index_t rows, index_t cols, std::mt19937_64& rng) {
    std::vector<T> m(static_cast<std::size_t>(rows * cols));
    fill_uniform(m.data(), rows * cols, rng);
    return m;
}

inline index_t rand_in(std::mt19937_64& rng, index_t lo, index_t hi) {
    return std::uniform_int_distribution<index_t>(lo, hi)(rng);
}

// Valid random conv geometry with spatial/filter/channel extents <= cap.
inline ConvParams random_conv_params(std::mt19937_64& rng, index_t cap = 8,
                                     index_t max_batch = 3) {
    for (;;) {
        ConvParams cp;
        cp.k_n = rand_in(rng, 1, cap);
        cp.k_h = rand_in(rng, 1, cap);
        cp.k_w = rand_in(rng, 1, cap);
        cp.c_i = rand_in(rng, 1, cap);
        cp.h_i = rand_in(rng, 1, cap);
        cp.w_i = rand_in(rng, 1, cap);
        cp.b = rand_in(rng, 1, max_batch);
        cp.s = rand_in(rng, 1, 2);
        cp.p = rand_in(rng, 0, 1);
        if (cp.h_i - cp.k_h + 2 * cp.p >= 0 && cp.w_i - cp.k_w + 2 * cp.p >= 0)
            return cp;
    }
}

inline Tensor4<double> widen(const Tensor4<float>& t) {
    Tensor4<double> out(t.d0(), t.d1(), t.d2(), t.d3());
    for (index_t i = 0; i < t.size(); ++i)
        out.data()[i] = static_cast<double>(t.data()[i]);
    return out;
}

}  // namespace testutil
