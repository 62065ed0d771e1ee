#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace rmlab {

// runs fn(block_index) for blocks [0, n_blocks) across a fixed worker count;
// callers own any per-block output slots, so merges stay order-deterministic
inline void parallel_blocks(int n_blocks, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n_blocks <= 1) {
        for (int b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int b = w; b < n_blocks; b += workers) fn(b);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace rmlab
