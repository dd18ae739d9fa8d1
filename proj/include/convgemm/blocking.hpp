#pragma once

#include <stdexcept>

#include "convgemm/types.hpp"

namespace convgemm {

// Strides of the five blocked gemm loops: mc/nc/kc pick the cache blocks,
// mr/nr the register micro-tile.
struct BlockingParams {
    index_t mc = 120;
    index_t nc = 3072;
    index_t kc = 640;
    index_t mr = 8;
    index_t nr = 12;
};

// Micro-tile accumulators live on the stack.
inline constexpr index_t kMaxMicroTile = 4096;

inline void validate(const BlockingParams& bp) {
    if (bp.mc < 1 || bp.nc < 1 || bp.kc < 1 || bp.mr < 1 || bp.nr < 1)
        throw std::invalid_argument("blocking parameters must be positive");
    if (bp.mr > bp.mc || bp.nr > bp.nc)
        throw std::invalid_argument("micro-tile must fit the cache block (mr<=mc, nr<=nc)");
    if (bp.mr * bp.nr > kMaxMicroTile)
        throw std::invalid_argument("micro-tile mr*nr exceeds the supported maximum");
}

}  // namespace convgemm
