#pragma once

#include <algorithm>

#include "convgemm/blocking.hpp"
#include "convgemm/tensor.hpp"

namespace convgemm {

// Innermost gemm routine: a loop of rank-1 updates over one mr x kc and one
// kc x nr packed micro-panel, accumulated in a local mr x nr tile that is
// flushed to C once. m_eff/n_eff clip the flush at edge tiles; zero-filled
// panel slots keep the spare accumulator lanes at zero, so they never leak
// into C.
template <typename T>
using MicroKernelFn = void (*)(const T* a_panel, const T* b_panel, index_t depth,
                               index_t mr, index_t nr,
                               T* c, index_t ldc, index_t m_eff, index_t n_eff);

template <typename T, int MR, int NR>
void microkernel_fixed(const T* a_panel, const T* b_panel, index_t depth,
                       index_t /*mr*/, index_t /*nr*/,
                       T* c, index_t ldc, index_t m_eff, index_t n_eff) {
    T acc[MR * NR]{};
    for (index_t p = 0; p < depth; ++p) {
        const T* a = a_panel + p * MR;
        const T* b = b_panel + p * NR;
        for (int j = 0; j < NR; ++j) {
            const T bj = b[j];
            T* col = acc + j * MR;
            for (int i = 0; i < MR; ++i)
                col[i] += a[i] * bj;
        }
    }
    for (index_t j = 0; j < n_eff; ++j)
        for (index_t i = 0; i < m_eff; ++i)
            c[i + j * ldc] += acc[i + j * MR];
}

template <typename T>
void microkernel_generic(const T* a_panel, const T* b_panel, index_t depth,
                         index_t mr, index_t nr,
                         T* c, index_t ldc, index_t m_eff, index_t n_eff) {
    T acc[kMaxMicroTile];
    std::fill_n(acc, mr * nr, T(0));
    for (index_t p = 0; p < depth; ++p) {
        const T* a = a_panel + p * mr;
        const T* b = b_panel + p * nr;
        for (index_t j = 0; j < nr; ++j) {
            const T bj = b[j];
            T* col = acc + j * mr;
            for (index_t i = 0; i < mr; ++i)
                col[i] += a[i] * bj;
        }
    }
    for (index_t j = 0; j < n_eff; ++j)
        for (index_t i = 0; i < m_eff; ++i)
            c[i + j * ldc] += acc[i + j * mr];
}

// The blocked loops only ever see this signature; a tuned or ISA-specific
// kernel for some (mr, nr) slots in here.
template <typename T>
MicroKernelFn<T> select_microkernel(const BlockingParams& bp) {
    if (bp.mr == 8 && bp.nr == 12) return microkernel_fixed<T, 8, 12>;
    if (bp.mr == 4 && bp.nr == 4) return microkernel_fixed<T, 4, 4>;
    return microkernel_generic<T>;
}

// Convenience entry taking the C tile as a view.
template <typename T>
void microkernel(const T* a_panel, const T* b_panel, index_t depth,
                 const BlockingParams& bp, MatrixView<T> c_tile) {
    select_microkernel<T>(bp)(a_panel, b_panel, depth, bp.mr, bp.nr,
                              c_tile.data, c_tile.ld, c_tile.rows, c_tile.cols);
}

}  // namespace convgemm
