#pragma once

// Minimal fork-join helper. Work items must write to disjoint outputs.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cangle {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{1};
    return n;
}
}  // namespace detail

inline void set_thread_count(unsigned n) { detail::thread_setting() = std::max(1u, n); }
inline unsigned thread_count() { return detail::thread_setting(); }

/// Runs f(0) ... f(n−1). With several workers the exception of the lowest
/// failing index is rethrown, so failures do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr error;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next++;
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_at) {
                    failed_at = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace cangle
