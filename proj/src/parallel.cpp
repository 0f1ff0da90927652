#include "spotcd/parallel.hpp"

#include <atomic>
#include <thread>

namespace spotcd {

namespace {
std::atomic<int> g_threads{0};
}

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
#endif
}

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int threads() {
    int n = g_threads.load();
    return n == 0 ? hardware_threads() : n;
}

}  // namespace spotcd
