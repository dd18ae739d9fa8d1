#pragma once

#include "convgemm/types.hpp"

namespace convgemm {

// Complete geometry of one convolution layer.
struct ConvParams {
    index_t k_n = 1;          // filter count
    index_t k_h = 1, k_w = 1; // filter spatial extents
    index_t c_i = 1;          // input channels
    index_t h_i = 1, w_i = 1; // input spatial extents
    index_t b = 1;            // batch size
    index_t s = 1;            // stride
    index_t p = 0;            // symmetric zero padding
};

struct OutputDims {
    index_t h_o = 0, w_o = 0;
};

struct GemmDims {
    index_t m = 0, n = 0, k = 0;
};

// h_o = floor((h_i - k_h + 2p)/s + 1), likewise for w_o.
inline OutputDims output_dims(const ConvParams& cp) {
    if (cp.k_n < 1 || cp.k_h < 1 || cp.k_w < 1 || cp.c_i < 1 || cp.h_i < 1 ||
        cp.w_i < 1 || cp.b < 1 || cp.s < 1 || cp.p < 0)
        throw InvalidGeometry("conv extents must be positive (padding non-negative)");
    const index_t dh = cp.h_i - cp.k_h + 2 * cp.p;
    const index_t dw = cp.w_i - cp.k_w + 2 * cp.p;
    if (dh < 0 || dw < 0)
        throw InvalidGeometry("filter exceeds padded input");
    return {dh / cp.s + 1, dw / cp.s + 1};
}

// Extents of the lowered matrix product: m = k_n, n = h_o*w_o*b,
// k = k_h*k_w*c_i.
inline GemmDims gemm_dims(const ConvParams& cp) {
    const OutputDims od = output_dims(cp);
    return {cp.k_n, od.h_o * od.w_o * cp.b, cp.k_h * cp.k_w * cp.c_i};
}

}  // namespace convgemm
