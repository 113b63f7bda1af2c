#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace fplab {

// Index-sharded parallel loop. Work items must be independent; results are
// written into caller-owned slots keyed by index, so the output is identical
// for any thread count.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::size_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([=, &fn] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

} // namespace fplab
