#pragma once

#include "convgemm/gemm.hpp"
#include "convgemm/im2col.hpp"
#include "convgemm/tensor.hpp"

namespace convgemm {

template <typename T>
void require_filter_shape(Tensor4View<const T> F, const ConvParams& cp) {
    if (F.d0 != cp.k_n || F.d1 != cp.k_h || F.d2 != cp.k_w || F.d3 != cp.c_i)
        throw InvalidGeometry("filter tensor extents disagree with ConvParams");
}

template <typename T>
void require_output_shape(Tensor4View<T> O, const ConvParams& cp, const OutputDims& od) {
    if (O.d0 != cp.k_n || O.d1 != od.h_o || O.d2 != od.w_o || O.d3 != cp.b)
        throw InvalidGeometry("output tensor extents disagree with ConvParams");
}

// Reference path: the plain seven-loop convolution with virtual zero padding
// (out-of-range input reads contribute nothing). Deliberately unblocked and
// single-threaded.
template <typename T>
void conv_direct(Tensor4View<const T> F, Tensor4View<const T> I,
                 const ConvParams& cp, Tensor4View<T> O) {
    require_input_shape(I, cp);
    require_filter_shape(F, cp);
    const OutputDims od = output_dims(cp);
    require_output_shape(O, cp, od);

    std::fill_n(O.data, O.size(), T(0));
    for (index_t i_b = 0; i_b < cp.b; ++i_b) {
        for (index_t i_c = 0; i_c < cp.c_i; ++i_c) {
            const T* plane = I.data + (i_c + i_b * cp.c_i) * cp.h_i * cp.w_i;
            for (index_t i_w = 0; i_w < od.w_o; ++i_w) {
                for (index_t i_h = 0; i_h < od.h_o; ++i_h) {
                    T* out_col = O.data + O.offset(0, i_h, i_w, i_b);
                    for (index_t i_kw = 0; i_kw < cp.k_w; ++i_kw) {
                        const index_t w_in = i_w * cp.s + i_kw - cp.p;
                        if (w_in < 0 || w_in >= cp.w_i) continue;
                        for (index_t i_kh = 0; i_kh < cp.k_h; ++i_kh) {
                            const index_t h_in = i_h * cp.s + i_kh - cp.p;
                            if (h_in < 0 || h_in >= cp.h_i) continue;
                            const T x = plane[w_in * cp.h_i + h_in];
                            const T* f_col = F.data + F.offset(0, i_kh, i_kw, i_c);
                            for (index_t i_k = 0; i_k < cp.k_n; ++i_k)
                                out_col[i_k] += f_col[i_k] * x;
                        }
                    }
                }
            }
        }
    }
}

// Two-stage path: materialize the lowered matrix, then gemm on it. The k x n
// workspace is allocated on every call on purpose; the allocation failure of
// an oversized batch surfaces here.
template <typename T>
void conv_im2col_gemm(Tensor4View<const T> F, Tensor4View<const T> I,
                      const ConvParams& cp, const BlockingParams& bp,
                      int threads, Tensor4View<T> O) {
    require_input_shape(I, cp);
    require_filter_shape(F, cp);
    const OutputDims od = output_dims(cp);
    require_output_shape(O, cp, od);

    const Im2colMatrix<T> B = im2col<T>(I, cp, threads);
    MatrixView<T> Chat = output_as_matrix(O);
    zero_matrix(Chat);
    MatrixSource<T> src(B.view());
    gemm<T>(filters_as_matrix(F), src, Chat, gemm_dims(cp), bp, threads);
}

// Fused path: the B packing reads the input tensor directly, so the only
// workspace is the pair of packing buffers, whatever the problem size.
template <typename T>
void conv_gemm(Tensor4View<const T> F, Tensor4View<const T> I,
               const ConvParams& cp, const BlockingParams& bp,
               int threads, Tensor4View<T> O) {
    require_input_shape(I, cp);
    require_filter_shape(F, cp);
    const OutputDims od = output_dims(cp);
    require_output_shape(O, cp, od);

    Im2colSource<T> src(I, cp);
    MatrixView<T> Chat = output_as_matrix(O);
    zero_matrix(Chat);
    gemm<T>(filters_as_matrix(F), src, Chat, gemm_dims(cp), bp, threads);
}

template <typename T>
Tensor4<T> conv_direct(const Tensor4<T>& F, const Tensor4<T>& I, const ConvParams& cp) {
    const OutputDims od = output_dims(cp);
    Tensor4<T> O(cp.k_n, od.h_o, od.w_o, cp.b);
    conv_direct<T>(F.view(), I.view(), cp, O.view());
    return O;
}

template <typename T>
Tensor4<T> conv_im2col_gemm(const Tensor4<T>& F, const Tensor4<T>& I,
                            const ConvParams& cp, const BlockingParams& bp = {},
                            int threads = 1) {
    const OutputDims od = output_dims(cp);
    Tensor4<T> O(cp.k_n, od.h_o, od.w_o, cp.b);
    conv_im2col_gemm<T>(F.view(), I.view(), cp, bp, threads, O.view());
    return O;
}

template <typename T>
Tensor4<T> conv_gemm(const Tensor4<T>& F, const Tensor4<T>& I,
                     const ConvParams& cp, const BlockingParams& bp = {},
                     int threads = 1) {
    const OutputDims od = output_dims(cp);
    Tensor4<T> O(cp.k_n, od.h_o, od.w_o, cp.b);
    conv_gemm<T>(F.view(), I.view(), cp, bp, threads, O.view());
    return O;
}

}  // namespace convgemm
