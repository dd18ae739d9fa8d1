#pragma once

#include <atomic>
#include <cstddef>

#include "convgemm/types.hpp"

namespace convgemm {

// Global accounting of library-internal workspace: the packing buffers and
// any materialized im2col matrix go through here. `peak` is what workspace
// claims are checked against; a non-zero limit turns oversized requests into
// AllocationFailure.
class ScratchTracker {
public:
    static void* allocate(std::size_t bytes);
    static void deallocate(void* p, std::size_t bytes) noexcept;

    static std::size_t current_bytes() noexcept;
    static std::size_t peak_bytes() noexcept;
    static void reset_peak() noexcept;                 // peak := current
    static void set_limit(std::size_t bytes) noexcept; // 0 = unlimited

private:
    static std::atomic<std::size_t> current_;
    static std::atomic<std::size_t> peak_;
    static std::atomic<std::size_t> limit_;
};

// 64-byte aligned, tracker-accounted buffer. Contents start uninitialized.
template <typename T>
class ScratchBuffer {
public:
    ScratchBuffer() = default;

    explicit ScratchBuffer(index_t count)
        : count_(count),
          data_(static_cast<T*>(
              ScratchTracker::allocate(static_cast<std::size_t>(count) * sizeof(T)))) {}

    ScratchBuffer(ScratchBuffer&& other) noexcept
        : count_(other.count_), data_(other.data_) {
        other.count_ = 0;
        other.data_ = nullptr;
    }

    ScratchBuffer& operator=(ScratchBuffer&& other) noexcept {
        if (this != &other) {
            release();
            count_ = other.count_;
            data_ = other.data_;
            other.count_ = 0;
            other.data_ = nullptr;
        }
        return *this;
    }

    ScratchBuffer(const ScratchBuffer&) = delete;
    ScratchBuffer& operator=(const ScratchBuffer&) = delete;

    ~ScratchBuffer() { release(); }

    T* data() noexcept { return data_; }
    const T* data() const noexcept { return data_; }
    index_t count() const noexcept { return count_; }

private:
    void release() noexcept {
        if (data_)
            ScratchTracker::deallocate(data_, static_cast<std::size_t>(count_) * sizeof(T));
        data_ = nullptr;
        count_ = 0;
    }

    index_t count_ = 0;
    T* data_ = nullptr;
};

}  // namespace convgemm
