#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace nlpoint {

// Worker count: NLPOINT_THREADS if set (clamped to >= 1), otherwise the
// hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("NLPOINT_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs body(i) for i in [0, n). Work is handed out through a shared atomic
// counter; the first exception thrown by any worker is rethrown on the
// caller. Falls back to a plain loop when only one worker is available.
template <class F>
void parallel_for(std::size_t n, F&& body) {
    const unsigned workers = std::min<std::size_t>(thread_count(), n ? n : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto run = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(first_error);
}

} // namespace nlpoint
