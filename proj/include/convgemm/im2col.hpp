#pragma once

#include "convgemm/conv_params.hpp"
#include "convgemm/packing.hpp"

namespace convgemm {

struct RowCoords {
    index_t i_c, i_kw, i_kh;
};

struct ColCoords {
    index_t i_b, i_w, i_h;
};

// Row r of the lowered matrix <-> (channel, filter column, filter row).
inline RowCoords decompose_row(index_t r, const ConvParams& cp) {
    const index_t khw = cp.k_h * cp.k_w;
    const index_t rem = r % khw;
    return {r / khw, rem / cp.k_h, rem % cp.k_h};
}

inline ColCoords decompose_col(index_t c, const OutputDims& od) {
    const index_t hw = od.h_o * od.w_o;
    const index_t rem = c % hw;
    return {c / hw, rem / od.h_o, rem % od.h_o};
}

// Column c <-> (batch image, output column, output row).
inline ColCoords decompose_col(index_t c, const ConvParams& cp) {
    return decompose_col(c, output_dims(cp));
}

// Explicit workspace of the two-stage path: (k_h*k_w*c_i) x (h_o*w_o*b)
// single-precision elements.
inline index_t im2col_workspace_bytes(const ConvParams& cp) {
    const GemmDims g = gemm_dims(cp);
    return g.k * g.n * static_cast<index_t>(sizeof(float));
}

// Workspace of the fused path: the two packing buffers, nothing else.
inline index_t convgemm_scratch_bytes(const BlockingParams& bp) {
    return (bp.mc * bp.kc + bp.kc * bp.nc) * static_cast<index_t>(sizeof(float));
}

template <typename T>
void require_input_shape(Tensor4View<const T> I, const ConvParams& cp) {
    if (I.d0 != cp.h_i || I.d1 != cp.w_i || I.d2 != cp.c_i || I.d3 != cp.b)
        throw InvalidGeometry("input tensor extents disagree with ConvParams");
}

// Owning lowered matrix; the buffer counts as tracked workspace and is
// allocated per call.
template <typename T>
class Im2colMatrix {
public:
    Im2colMatrix(index_t rows, index_t cols)
        : rows_(rows), cols_(cols), storage_(rows * cols) {}

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }

    MatrixView<T> view() { return {storage_.data(), rows_, cols_, rows_}; }
    MatrixView<const T> view() const { return {storage_.data(), rows_, cols_, rows_}; }

private:
    index_t rows_, cols_;
    ScratchBuffer<T> storage_;
};

// Explicit im2col transform. Loop order: batch, channel, output column,
// output row, then filter column/row; element (r, c) with
// r = i_kh + i_kw*k_h + i_c*k_w*k_h and c = i_h + i_w*h_o + i_b*w_o*h_o is
// the input at (i_h*s + i_kh - p, i_w*s + i_kw - p, i_c, i_b), zero when the
// read falls into the padding. The channel loop is split across threads:
// each (i_b, i_c) pair owns a disjoint row band of the batch-i_b columns.
template <typename T>
Im2colMatrix<T> im2col(Tensor4View<const T> I, const ConvParams& cp, int threads = 1) {
    require_input_shape(I, cp);
    const OutputDims od = output_dims(cp);
    const GemmDims g = gemm_dims(cp);
    Im2colMatrix<T> out(g.k, g.n);
    T* B = out.view().data;
    const index_t k = g.k;
    if (threads < 1) threads = 1;

    run_team(threads, [&](int rank, auto&) {
        for (index_t i_b = 0; i_b < cp.b; ++i_b) {
            const IndexRange channels = split_range(cp.c_i, rank, threads);
            for (index_t i_c = channels.begin; i_c < channels.end; ++i_c) {
                const index_t r0 = i_c * cp.k_h * cp.k_w;
                const T* plane = I.data + (i_c + i_b * cp.c_i) * cp.h_i * cp.w_i;
                for (index_t i_w = 0; i_w < od.w_o; ++i_w) {
                    const index_t c_base = (i_w + i_b * od.w_o) * od.h_o;
                    for (index_t i_h = 0; i_h < od.h_o; ++i_h) {
                        T* col = B + (c_base + i_h) * k + r0;
                        const index_t h0 = i_h * cp.s - cp.p;
                        index_t r = 0;
                        for (index_t i_kw = 0; i_kw < cp.k_w; ++i_kw) {
                            const index_t w_in = i_w * cp.s + i_kw - cp.p;
                            if (w_in < 0 || w_in >= cp.w_i) {
                                for (index_t i_kh = 0; i_kh < cp.k_h; ++i_kh)
                                    col[r++] = T(0);
                                continue;
                            }
                            const T* in_col = plane + w_in * cp.h_i;
                            for (index_t i_kh = 0; i_kh < cp.k_h; ++i_kh) {
                                const index_t h_in = h0 + i_kh;
                                col[r++] = (h_in >= 0 && h_in < cp.h_i)
                                               ? in_col[h_in]
                                               : T(0);
                            }
                        }
                    }
                }
            }
        }
    });
    return out;
}

template <typename T>
class Im2colSource;

template <typename T>
void pack_b_im2col(const Im2colSource<T>& src, index_t p_c, index_t j_c,
                   index_t kc_eff, index_t nc_eff, const BlockingParams& bp,
                   PackedPanel<T>& out, int rank = 0, int nranks = 1);

// The same lowered matrix served element by element straight from the input
// tensor; nothing is materialized.
template <typename T>
class Im2colSource final : public PackingSource<T> {
public:
    Im2colSource(Tensor4View<const T> input, const ConvParams& cp)
        : I_(input), cp_(cp), od_(output_dims(cp)) {
        require_input_shape(input, cp);
    }

    index_t rows() const override { return cp_.k_h * cp_.k_w * cp_.c_i; }
    index_t cols() const override { return od_.h_o * od_.w_o * cp_.b; }

    T at(index_t row, index_t col) const override {
        const RowCoords rc = decompose_row(row, cp_);
        const ColCoords cc = decompose_col(col, od_);
        const index_t h_in = cc.i_h * cp_.s + rc.i_kh - cp_.p;
        const index_t w_in = cc.i_w * cp_.s + rc.i_kw - cp_.p;
        if (h_in < 0 || h_in >= cp_.h_i || w_in < 0 || w_in >= cp_.w_i)
            return T(0);
        return I_(h_in, w_in, rc.i_c, cc.i_b);
    }

    void pack_block(index_t p_c, index_t j_c, index_t kc_eff, index_t nc_eff,
                    const BlockingParams& bp, PackedPanel<T>& out,
                    int rank = 0, int nranks = 1) const override {
        pack_b_im2col(*this, p_c, j_c, kc_eff, nc_eff, bp, out, rank, nranks);
    }

    const ConvParams& params() const { return cp_; }
    OutputDims out_dims() const { return od_; }
    Tensor4View<const T> input() const { return I_; }

private:
    Tensor4View<const T> I_;
    ConvParams cp_;
    OutputDims od_;
};

// Fused transform-and-pack: fills Bc micro-panels directly from the input
// tensor, bit-equal to pack_b over the materialized im2col matrix. The
// quotient/remainder decompositions run once per micro-panel; inside, the
// row coordinates (i_c, i_kw, i_kh) and column coordinates (i_b, i_w, i_h)
// advance as carry counters. Each panel row is processed in runs of
// consecutive output rows (fixed i_b, i_w), so the padding tests and the
// input address setup happen once per run and the copy itself is a tight
// strided loop; for unit stride it degenerates to a straight copy.
template <typename T>
void pack_b_im2col(const Im2colSource<T>& src, index_t p_c, index_t j_c,
                   index_t kc_eff, index_t nc_eff, const BlockingParams& bp,
                   PackedPanel<T>& out, int rank, int nranks) {
    const ConvParams& cp = src.params();
    const OutputDims od = src.out_dims();
    const T* in = src.input().data;
    const index_t nr = bp.nr;
    const index_t plane = cp.h_i * cp.w_i;  // one channel of one image
    const IndexRange panels = split_range(ceil_div(nc_eff, nr), rank, nranks);

    for (index_t jp = panels.begin; jp < panels.end; ++jp) {
        const index_t j_r = jp * nr;
        const index_t cols = std::min(nr, nc_eff - j_r);
        T* dst = out.data.data() + jp * kc_eff * nr;

        const ColCoords col0 = decompose_col(j_c + j_r, od);
        RowCoords rc = decompose_row(p_c, cp);

        for (index_t p_s = 0; p_s < kc_eff; ++p_s) {
            const index_t h_base = rc.i_kh - cp.p;
            const index_t w_base = rc.i_kw - cp.p;
            index_t i_b = col0.i_b;
            index_t i_w = col0.i_w;
            index_t i_h = col0.i_h;
            T* d = dst + p_s * nr;
            index_t j_s = 0;
            while (j_s < cols) {
                const index_t run = std::min(cols - j_s, od.h_o - i_h);
                const index_t w_in = i_w * cp.s + w_base;
                if (w_in < 0 || w_in >= cp.w_i) {
                    for (index_t j = 0; j < run; ++j)
                        d[j_s + j] = T(0);
                } else {
                    const T* column = in + (rc.i_c + i_b * cp.c_i) * plane + w_in * cp.h_i;
                    const index_t h_start = i_h * cp.s + h_base;
                    // j range with 0 <= h_start + j*s < h_i
                    index_t lead = 0;
                    index_t live = 0;
                    if (cp.s == 1) {
                        if (h_start < 0) lead = std::min(run, -h_start);
                        if (h_start < cp.h_i) live = std::min(run, cp.h_i - h_start);
                    } else {
                        if (h_start < 0) lead = std::min(run, (-h_start + cp.s - 1) / cp.s);
                        if (h_start < cp.h_i)
                            live = std::min(run, (cp.h_i - h_start + cp.s - 1) / cp.s);
                    }
                    for (index_t j = 0; j < lead; ++j)
                        d[j_s + j] = T(0);
                    if (cp.s == 1) {
                        const T* run_src = column + h_start;
                        for (index_t j = lead; j < live; ++j)
                            d[j_s + j] = run_src[j];
                    } else {
                        for (index_t j = lead; j < live; ++j)
                            d[j_s + j] = column[h_start + j * cp.s];
                    }
                    for (index_t j = live; j < run; ++j)
                        d[j_s + j] = T(0);
                }
                j_s += run;
                i_h += run;
                if (i_h == od.h_o) {  // next output column, maybe next image
                    i_h = 0;
                    if (++i_w == od.w_o) {
                        i_w = 0;
                        ++i_b;
                    }
                }
            }
            for (index_t j = cols; j < nr; ++j)
                d[j] = T(0);
            if (++rc.i_kh == cp.k_h) {  // next row of the lowered matrix
                rc.i_kh = 0;
                if (++rc.i_kw == cp.k_w) {
                    rc.i_kw = 0;
                    ++rc.i_c;
                }
            }
        }
    }
    if (rank == 0) {
        out.panel_rows = kc_eff;
        out.panel_cols = nc_eff;
    }
}

}  // namespace convgemm
