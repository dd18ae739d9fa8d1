#pragma once

#include <vector>

#include "convgemm/conv_params.hpp"
#include "convgemm/microkernel.hpp"
#include "convgemm/packing.hpp"

namespace convgemm {

// Logical work counters: one entry per packed Bc block, plus totals for the
// A packs and the micro-kernel flops. Counted, not measured.
struct GemmBlockStat {
    index_t kc_eff = 0;
    index_t nc_eff = 0;
    index_t b_elements_packed = 0;  // source elements moved into Bc
    index_t l3_flops = 0;           // flops executed against this Bc
};

struct GemmStats {
    std::vector<GemmBlockStat> blocks;  // one per (j_c, p_c)
    index_t a_elements_packed = 0;
    index_t flops = 0;
};

template <typename T>
void zero_matrix(MatrixView<T> C) {
    for (index_t j = 0; j < C.cols; ++j)
        std::fill_n(C.data + j * C.ld, C.rows, T(0));
}

// C += A * B, blocked:
//
//   L1  j_c over n in steps of nc
//   L2  p_c over k in steps of kc     pack B block -> Bc   (once per j_c,p_c)
//   L3  i_c over m in steps of mc     pack A block -> Ac   (once per j_c,p_c,i_c)
//   L4  j_r over nc_eff in steps of nr \   macro-kernel
//   L5  i_r over mc_eff in steps of mr /
//
// Ac and Bc are allocated once per call. With a team, L4 and the micro-panel
// loops of both packs are split statically by rank, and barriers separate
// packing from compute so both buffers are read-shared. Each C micro-tile is
// owned by exactly one rank per (j_c,p_c,i_c) step and the per-element
// accumulation order is fixed by the loop nest, so results are bit-identical
// for any thread count.
template <typename T>
void gemm(MatrixView<const T> A, const PackingSource<T>& B, MatrixView<T> C,
          const GemmDims& dims, const BlockingParams& bp, int threads = 1,
          GemmStats* stats = nullptr) {
    validate(bp);
    if (A.rows != dims.m || A.cols != dims.k || C.rows != dims.m ||
        C.cols != dims.n || B.rows() != dims.k || B.cols() != dims.n)
        throw DimensionMismatch("gemm operand extents disagree with (m,n,k)");
    if (threads < 1) threads = 1;

    PackedPanel<T> Ac(bp.mc * bp.kc, bp.mr);
    PackedPanel<T> Bc(bp.kc * bp.nc, bp.nr);
    const MicroKernelFn<T> kernel = select_microkernel<T>(bp);

    run_team(threads, [&](int rank, auto& barrier) {
        for (index_t j_c = 0; j_c < dims.n; j_c += bp.nc) {
            const index_t nc_eff = std::min(bp.nc, dims.n - j_c);
            const index_t jr_panels = ceil_div(nc_eff, bp.nr);
            for (index_t p_c = 0; p_c < dims.k; p_c += bp.kc) {
                const index_t kc_eff = std::min(bp.kc, dims.k - p_c);
                B.pack_block(p_c, j_c, kc_eff, nc_eff, bp, Bc, rank, threads);
                if (rank == 0 && stats)
                    stats->blocks.push_back({kc_eff, nc_eff, kc_eff * nc_eff,
                                             2 * dims.m * kc_eff * nc_eff});
                barrier.arrive_and_wait();
                for (index_t i_c = 0; i_c < dims.m; i_c += bp.mc) {
                    const index_t mc_eff = std::min(bp.mc, dims.m - i_c);
                    pack_a(A, i_c, p_c, mc_eff, kc_eff, bp, Ac, rank, threads);
                    if (rank == 0 && stats) {
                        stats->a_elements_packed += mc_eff * kc_eff;
                        stats->flops += 2 * mc_eff * nc_eff * kc_eff;
                    }
                    barrier.arrive_and_wait();
                    const IndexRange mine = split_range(jr_panels, rank, threads);
                    for (index_t jp = mine.begin; jp < mine.end; ++jp) {
                        const index_t j_r = jp * bp.nr;
                        const index_t n_eff = std::min(bp.nr, nc_eff - j_r);
                        const T* b_panel = Bc.data.data() + jp * kc_eff * bp.nr;
                        for (index_t i_r = 0; i_r < mc_eff; i_r += bp.mr) {
                            const T* a_panel =
                                Ac.data.data() + (i_r / bp.mr) * bp.mr * kc_eff;
                            kernel(a_panel, b_panel, kc_eff, bp.mr, bp.nr,
                                   &C(i_c + i_r, j_c + j_r), C.ld,
                                   std::min(bp.mr, mc_eff - i_r), n_eff);
                        }
                    }
                    barrier.arrive_and_wait();
                }
            }
        }
    });
}

// C += A * B for plain column-major operands.
template <typename T>
void gemm(MatrixView<const T> A, MatrixView<const T> B, MatrixView<T> C,
          const BlockingParams& bp = {}, int threads = 1, GemmStats* stats = nullptr) {
    MatrixSource<T> src(B);
    gemm<T>(A, src, C, GemmDims{A.rows, B.cols, A.cols}, bp, threads, stats);
}

}  // namespace convgemm
