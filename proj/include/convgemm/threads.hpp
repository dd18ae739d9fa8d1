#pragma once

#include <algorithm>
#include <barrier>
#include <thread>
#include <vector>

#include "convgemm/types.hpp"

namespace convgemm {

struct IndexRange {
    index_t begin = 0;
    index_t end = 0;
};

// Contiguous static split of [0, count) among nranks workers; the first
// `count % nranks` ranks take one extra item. Deterministic in (count, rank,
// nranks) only.
inline IndexRange split_range(index_t count, int rank, int nranks) {
    const index_t base = count / nranks;
    const index_t rem = count % nranks;
    const index_t begin = rank * base + std::min<index_t>(rank, rem);
    return {begin, begin + base + (rank < rem ? 1 : 0)};
}

// Runs body(rank, barrier) on `threads` workers, rank 0 on the calling
// thread. Every rank must reach the same sequence of arrive_and_wait calls.
template <typename Body>
void run_team(int threads, Body&& body) {
    if (threads < 1) threads = 1;
    std::barrier<> barrier(threads);
    if (threads == 1) {
        body(0, barrier);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(threads) - 1);
    for (int rank = 1; rank < threads; ++rank)
        workers.emplace_back([&body, &barrier, rank] { body(rank, barrier); });
    body(0, barrier);
}

}  // namespace convgemm
