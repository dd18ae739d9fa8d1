#pragma once

#include <algorithm>

#include "convgemm/blocking.hpp"
#include "convgemm/scratch.hpp"
#include "convgemm/tensor.hpp"
#include "convgemm/threads.hpp"

namespace convgemm {

// One packed cache block. Ac holds ceil(mc/mr) micro-panels of mr x kc, each
// column-major; Bc holds ceil(nc/nr) micro-panels of kc x nr, each row-major.
// Micro-panels sit back to back, so the panel stride is micro * panel_rows
// for Bc and micro * panel_cols for Ac. Allocated once, reused across blocks.
template <typename T>
struct PackedPanel {
    PackedPanel(index_t capacity, index_t micro_extent)
        : data(capacity), micro(micro_extent) {}

    ScratchBuffer<T> data;
    index_t panel_rows = 0;  // rows of the block currently packed
    index_t panel_cols = 0;  // columns of the block currently packed
    index_t micro;           // mr for Ac, nr for Bc
};

template <typename T>
class PackingSource;

// Generic B packing: micro-panel loop (j_r in steps of nr), then rows (p_s),
// then columns (j_s); the flat index i walks each kc_eff x nr micro-panel in
// row-major order. Columns past nc_eff are zero-filled. Ranks own disjoint
// micro-panels.
template <typename T>
void pack_b(const PackingSource<T>& src, index_t p_c, index_t j_c,
            index_t kc_eff, index_t nc_eff, const BlockingParams& bp,
            PackedPanel<T>& out, int rank = 0, int nranks = 1) {
    const index_t nr = bp.nr;
    const IndexRange panels = split_range(ceil_div(nc_eff, nr), rank, nranks);
    for (index_t jp = panels.begin; jp < panels.end; ++jp) {
        const index_t j_r = jp * nr;
        const index_t cols = std::min(nr, nc_eff - j_r);
        T* dst = out.data.data() + jp * kc_eff * nr;
        index_t i = 0;
        for (index_t p_s = 0; p_s < kc_eff; ++p_s) {
            for (index_t j_s = 0; j_s < cols; ++j_s)
                dst[i++] = src.at(p_c + p_s, j_c + j_r + j_s);
            for (index_t j_s = cols; j_s < nr; ++j_s)
                dst[i++] = T(0);
        }
    }
    if (rank == 0) {
        out.panel_rows = kc_eff;
        out.panel_cols = nc_eff;
    }
}

// Element provider for the right-hand gemm operand. Concrete sources
// override pack_block with layout-aware loops; the default walks at()
// element by element and exists for tests and one-off sources.
template <typename T>
class PackingSource {
public:
    virtual ~PackingSource() = default;

    virtual index_t rows() const = 0;
    virtual index_t cols() const = 0;

    // Pure read: equal indices always return equal values.
    virtual T at(index_t row, index_t col) const = 0;

    virtual void pack_block(index_t p_c, index_t j_c, index_t kc_eff, index_t nc_eff,
                            const BlockingParams& bp, PackedPanel<T>& out,
                            int rank = 0, int nranks = 1) const {
        pack_b(*this, p_c, j_c, kc_eff, nc_eff, bp, out, rank, nranks);
    }
};

// Plain column-major matrix as a packing source.
template <typename T>
class MatrixSource final : public PackingSource<T> {
public:
    explicit MatrixSource(MatrixView<const T> m) : m_(m) {}

    index_t rows() const override { return m_.rows; }
    index_t cols() const override { return m_.cols; }
    T at(index_t row, index_t col) const override { return m_(row, col); }

    void pack_block(index_t p_c, index_t j_c, index_t kc_eff, index_t nc_eff,
                    const BlockingParams& bp, PackedPanel<T>& out,
                    int rank = 0, int nranks = 1) const override {
        const index_t nr = bp.nr;
        const index_t ld = m_.ld;
        const IndexRange panels = split_range(ceil_div(nc_eff, nr), rank, nranks);
        for (index_t jp = panels.begin; jp < panels.end; ++jp) {
            const index_t j_r = jp * nr;
            const index_t cols = std::min(nr, nc_eff - j_r);
            T* dst = out.data.data() + jp * kc_eff * nr;
            const T* block = m_.data + p_c + (j_c + j_r) * ld;
            for (index_t p_s = 0; p_s < kc_eff; ++p_s) {
                const T* row = block + p_s;
                T* d = dst + p_s * nr;
                for (index_t j_s = 0; j_s < cols; ++j_s)
                    d[j_s] = row[j_s * ld];
                for (index_t j_s = cols; j_s < nr; ++j_s)
                    d[j_s] = T(0);
            }
        }
        if (rank == 0) {
            out.panel_rows = kc_eff;
            out.panel_cols = nc_eff;
        }
    }

private:
    MatrixView<const T> m_;
};

// A packing: micro-panel loop over row strips of mr, then columns (p_s);
// column-major inside each mr x kc_eff micro-panel. Rows past mc_eff are
// zero-filled. The outermost (panel) loop is what ranks split.
template <typename T>
void pack_a(MatrixView<const T> A, index_t i_c, index_t p_c,
            index_t mc_eff, index_t kc_eff, const BlockingParams& bp,
            PackedPanel<T>& out, int rank = 0, int nranks = 1) {
    const index_t mr = bp.mr;
    const IndexRange panels = split_range(ceil_div(mc_eff, mr), rank, nranks);
    for (index_t ip = panels.begin; ip < panels.end; ++ip) {
        const index_t i_r = ip * mr;
        const index_t live = std::min(mr, mc_eff - i_r);
        T* dst = out.data.data() + ip * mr * kc_eff;
        for (index_t p_s = 0; p_s < kc_eff; ++p_s) {
            const T* col = A.data + (i_c + i_r) + (p_c + p_s) * A.ld;
            T* d = dst + p_s * mr;
            for (index_t i = 0; i < live; ++i)
                d[i] = col[i];
            for (index_t i = live; i < mr; ++i)
                d[i] = T(0);
        }
    }
    if (rank == 0) {
        out.panel_rows = mc_eff;
        out.panel_cols = kc_eff;
    }
}

}  // namespace convgemm
