#include "convgemm/scratch.hpp"

#include <new>
#include <string>

namespace convgemm {

std::atomic<std::size_t> ScratchTracker::current_{0};
std::atomic<std::size_t> ScratchTracker::peak_{0};
std::atomic<std::size_t> ScratchTracker::limit_{0};

void* ScratchTracker::allocate(std::size_t bytes) {
    const std::size_t limit = limit_.load(std::memory_order_relaxed);
    const std::size_t now = current_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    if (limit != 0 && now > limit) {
        current_.fetch_sub(bytes, std::memory_order_relaxed);
        throw AllocationFailure("workspace limit exceeded: " + std::to_string(now) +
                                " bytes requested, limit " + std::to_string(limit));
    }
    std::size_t seen = peak_.load(std::memory_order_relaxed);
    while (seen < now &&
           !peak_.compare_exchange_weak(seen, now, std::memory_order_relaxed)) {
    }
    try {
        return ::operator new(bytes, std::align_val_t{64});
    } catch (const std::bad_alloc&) {
        current_.fetch_sub(bytes, std::memory_order_relaxed);
        throw AllocationFailure("cannot allocate " + std::to_string(bytes) +
                                " bytes of workspace");
    }
}

void ScratchTracker::deallocate(void* p, std::size_t bytes) noexcept {
    ::operator delete(p, std::align_val_t{64});
    current_.fetch_sub(bytes, std::memory_order_relaxed);
}

std::size_t ScratchTracker::current_bytes() noexcept {
    return current_.load(std::memory_order_relaxed);
}

std::size_t ScratchTracker::peak_bytes() noexcept {
    return peak_.load(std::memory_order_relaxed);
}

void ScratchTracker::reset_peak() noexcept {
    peak_.store(current_.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

void ScratchTracker::set_limit(std::size_t bytes) noexcept {
    limit_.store(bytes, std::memory_order_relaxed);
}

}  // namespace convgemm
