#pragma once

#include <type_traits>
#include <vector>

#include "convgemm/types.hpp"

namespace convgemm {

// Column-major matrix over storage owned elsewhere: element (i, j) lives at
// data[i + j*ld].
template <typename T>
struct MatrixView {
    T* data = nullptr;
    index_t rows = 0;
    index_t cols = 0;
    index_t ld = 0;  // leading dimension, >= rows

    T& operator()(index_t i, index_t j) const { return data[i + j * ld]; }

    operator MatrixView<const T>() const
        requires(!std::is_const_v<T>)
    {
        return {data, rows, cols, ld};
    }
};

// Non-owning rank-4 view with the leftmost index fastest in memory:
// (i0,i1,i2,i3) -> i0 + d0*(i1 + d1*(i2 + d2*i3)).
template <typename T>
struct Tensor4View {
    T* data = nullptr;
    index_t d0 = 0, d1 = 0, d2 = 0, d3 = 0;

    index_t size() const { return d0 * d1 * d2 * d3; }

    index_t offset(index_t i0, index_t i1, index_t i2, index_t i3) const {
        return i0 + d0 * (i1 + d1 * (i2 + d2 * i3));
    }

    T& operator()(index_t i0, index_t i1, index_t i2, index_t i3) const {
        return data[offset(i0, i1, i2, i3)];
    }

    operator Tensor4View<const T>() const
        requires(!std::is_const_v<T>)
    {
        return {data, d0, d1, d2, d3};
    }
};

// Owning rank-4 tensor; the buffer is contiguous, zero-initialized and laid
// out leftmost index fastest.
template <typename T>
class Tensor4 {
public:
    Tensor4(index_t d0, index_t d1, index_t d2, index_t d3)
        : d0_(d0), d1_(d1), d2_(d2), d3_(d3), data_(checked_size(d0, d1, d2, d3)) {}

    index_t d0() const { return d0_; }
    index_t d1() const { return d1_; }
    index_t d2() const { return d2_; }
    index_t d3() const { return d3_; }
    index_t size() const { return static_cast<index_t>(data_.size()); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator()(index_t i0, index_t i1, index_t i2, index_t i3) {
        return data_[view().offset(i0, i1, i2, i3)];
    }
    const T& operator()(index_t i0, index_t i1, index_t i2, index_t i3) const {
        return data_[view().offset(i0, i1, i2, i3)];
    }

    Tensor4View<T> view() { return {data_.data(), d0_, d1_, d2_, d3_}; }
    Tensor4View<const T> view() const { return {data_.data(), d0_, d1_, d2_, d3_}; }

private:
    static std::size_t checked_size(index_t d0, index_t d1, index_t d2, index_t d3) {
        if (d0 < 1 || d1 < 1 || d2 < 1 || d3 < 1)
            throw InvalidGeometry("tensor extents must be positive");
        return static_cast<std::size_t>(d0 * d1 * d2 * d3);
    }

    index_t d0_, d1_, d2_, d3_;
    std::vector<T> data_;
};

// Filter tensor F (k_n, k_h, k_w, c_i) seen as the k_n x (k_h*k_w*c_i) left
// gemm operand. No copy: the view aliases the tensor, column r holds filter
// position (i_kh + i_kw*k_h + i_c*k_w*k_h).
template <typename T>
MatrixView<T> filters_as_matrix(Tensor4View<T> F) {
    return {F.data, F.d0, F.d1 * F.d2 * F.d3, F.d0};
}

template <typename T>
MatrixView<T> filters_as_matrix(Tensor4<T>& F) {
    return filters_as_matrix(F.view());
}

template <typename T>
MatrixView<const T> filters_as_matrix(const Tensor4<T>& F) {
    return filters_as_matrix(F.view());
}

// Output tensor O (k_n, h_o, w_o, b) seen as the k_n x (h_o*w_o*b) gemm
// result; column c is output position (i_h + i_w*h_o + i_b*w_o*h_o).
template <typename T>
MatrixView<T> output_as_matrix(Tensor4View<T> O) {
    return {O.data, O.d0, O.d1 * O.d2 * O.d3, O.d0};
}

template <typename T>
MatrixView<T> output_as_matrix(Tensor4<T>& O) {
    return output_as_matrix(O.view());
}

template <typename T>
MatrixView<const T> output_as_matrix(const Tensor4<T>& O) {
    return output_as_matrix(O.view());
}

}  // namespace convgemm
