#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace awp {

namespace detail {
inline std::atomic<int>& thread_count_slot() {
    static std::atomic<int> n{1};
    return n;
}
}  // namespace detail

/// Set the number of worker threads used by row-parallel kernels.
/// Results are bit-identical for any value; this only affects wall time.
inline void set_num_threads(int n) {
    detail::thread_count_slot().store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

inline int num_threads() {
    return detail::thread_count_slot().load(std::memory_order_relaxed);
}

/// Run fn(i) for i in [begin, end). Work is split into contiguous index
/// blocks, one per thread. Each index is processed by exactly one thread and
/// all per-index work is sequential, so output written to disjoint slots per
/// index does not depend on the thread count.
template <typename Fn>
void parallel_for(std::int64_t begin, std::int64_t end, Fn&& fn) {
    const std::int64_t count = end - begin;
    if (count <= 0) return;
    const int threads = std::min<std::int64_t>(num_threads(), count);
    if (threads <= 1) {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
        return;
    }

    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const std::int64_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = begin + t * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi]() {
            try {
                for (std::int64_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                bool expected = false;
                if (failed.compare_exchange_strong(expected, true)) {
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace awp
