#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spotcd {

// Global worker count for the parallel kernels. 0 means "hardware default".
void set_threads(int n);
int threads();
int hardware_threads();

// Static schedule over [0, n). Every iteration writes only its own output
// slot, so the result is identical for any thread count.
template <typename F>
void parallel_for(std::int64_t n, F&& body) {
    int nt = threads();
    if (nt <= 1 || n <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) body(i);
#else
    for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace spotcd
