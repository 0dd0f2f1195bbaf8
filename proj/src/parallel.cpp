#include "wkl/parallel.hpp"

#include <atomic>
#include <stdexcept>

namespace wkl {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) {
    if (n < 1) throw std::invalid_argument("thread count must be at least 1");
    g_threads = n;
}

int thread_count() { return g_threads; }

}  // namespace wkl
