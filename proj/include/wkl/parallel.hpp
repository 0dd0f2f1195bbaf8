#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace wkl {

void set_thread_count(int n);
int thread_count();

// Splits [0, n) into thread_count() contiguous chunks and runs fn(chunk, begin, end)
// on each. Callers merge per-chunk results in chunk order, which keeps reductions
// reproducible for a fixed thread count.
template <class Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
    const std::size_t t = std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), n));
    auto bounds = [&](std::size_t c) { return n * c / t; };
    if (t == 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t c = 1; c < t; ++c) pool.emplace_back([&, c] { fn(c, bounds(c), bounds(c + 1)); });
    fn(std::size_t{0}, bounds(0), bounds(1));
    for (auto& th : pool) th.join();
}

inline std::size_t chunk_count(std::size_t n) {
    return std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), n));
}

}  // namespace wkl
