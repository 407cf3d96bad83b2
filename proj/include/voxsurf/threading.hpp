#ifndef VOXSURF_THREADING_HPP
#define VOXSURF_THREADING_HPP

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace voxsurf {

namespace detail {
inline std::atomic<int>& thread_setting() {
    static std::atomic<int> n{0};  // 0 = auto
    return n;
}
}  // namespace detail

/// Set the worker-thread cap. 0 restores auto (hardware concurrency).
inline void set_max_threads(int n) { detail::thread_setting().store(n < 0 ? 0 : n); }

/// Resolved worker count, always >= 1.
inline int max_threads() {
    int n = detail::thread_setting().load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run fn(begin, end) over disjoint contiguous chunks of [0, n).
/// Chunk boundaries depend only on n and the worker count; workers write
/// disjoint outputs, so results are identical for any thread count.
template <typename Fn>
void parallel_chunks(std::int64_t n, Fn&& fn) {
    if (n <= 0) return;
    int workers = max_threads();
    if (workers > n) workers = static_cast<int>(n);
    if (workers <= 1) {
        fn(std::int64_t{0}, n);
        return;
    }
    std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) {
        std::int64_t b = w * chunk;
        std::int64_t e = std::min<std::int64_t>(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    fn(std::int64_t{0}, std::min<std::int64_t>(n, chunk));
    for (auto& t : pool) t.join();
}

}  // namespace voxsurf

#endif  // VOXSURF_THREADING_HPP
