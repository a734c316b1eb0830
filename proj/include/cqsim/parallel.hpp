#pragma once

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cqsim {

// Worker count: CQSIM_THREADS if set, else hardware concurrency.
inline int n_workers() {
    if (const char* env = std::getenv("CQSIM_THREADS")) {
        const int n = std::atoi(env);
        if (n < 1)
            throw std::runtime_error("CQSIM_THREADS must be a positive integer, got '" +
                                     std::string(env) + "'");
        return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(block) for block = 0..n_blocks-1 on a self-scheduling worker pool.
// Workers claim whole blocks, so any result written to a per-block slot is
// independent of the worker count.
template <typename Fn>
void parallel_blocks(std::size_t n_blocks, Fn&& fn) {
    const int workers = std::min<std::size_t>(n_workers(), n_blocks ? n_blocks : 1);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b)
            fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_blocks || failed.load())
                    return;
                try {
                    fn(b);
                } catch (...) {
                    if (!failed.exchange(true))
                        error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (failed.load())
        std::rethrow_exception(error);
}

}  // namespace cqsim
