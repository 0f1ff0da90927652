#include <chrono>
#include <cstdio>
#include <vector>

#include "spotcd/citest.hpp"
#include "spotcd/features.hpp"
#include "spotcd/parallel.hpp"
#include "spotcd/rng.hpp"
#include "spotcd/scm.hpp"

using namespace spotcd;

namespace {

double seconds_of(const std::function<void()>& body, int reps) {
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) body();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-24s serial %8.4fs  parallel %8.4fs  speedup %5.2fx\n", name, serial,
                parallel, parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

// Serial reference vs OpenMP kernel timings on a fixed synthetic workload.
int main() {
    std::printf("threads: %d (hardware %d)\n", threads(), hardware_threads());

    Rng rng(7);
    GraphSamplerConfig gc;
    gc.d = 60;
    Admg g = sample_admg(gc, rng);
    ScmParams params = parameterize_scm(g, WeightRanges{}, rng);
    Dataset data = sample_dataset(params, 4000, rng);

    report("covariance_matrix",
           seconds_of([&] { covariance_matrix_serial(data.X); }, 5),
           seconds_of([&] { covariance_matrix(data.X); }, 5));

    CiCache cache = make_ci_cache(data);
    std::vector<CiQuery> queries;
    Rng qrng(11);
    for (int q = 0; q < 4000; ++q) {
        CiQuery cq;
        cq.i = qrng.uniform_int(0, gc.d - 1);
        do {
            cq.j = qrng.uniform_int(0, gc.d - 1);
        } while (cq.j == cq.i);
        int k = qrng.uniform_int(0, 4);
        while (static_cast<int>(cq.z.size()) < k) {
            int c = qrng.uniform_int(0, gc.d - 1);
            bool dup = c == cq.i || c == cq.j;
            for (int z : cq.z) dup |= (z == c);
            if (!dup) cq.z.push_back(c);
        }
        queries.push_back(std::move(cq));
    }
    report("ci_batch",
           seconds_of([&] { ci_batch_serial(cache, queries); }, 3),
           seconds_of([&] { ci_batch(cache, queries); }, 3));

    int saved = threads();
    report("extract_pair_features",
           seconds_of([&] {
               set_threads(1);
               extract_pair_features(data, 0, nullptr);
               set_threads(saved);
           }, 3),
           seconds_of([&] { extract_pair_features(data, 0, nullptr); }, 3));

    CorpusConfig cc;
    cc.count = 12;
    cc.d_range = {20, 30};
    cc.n = 1000;
    report("generate_corpus",
           seconds_of([&] {
               set_threads(1);
               generate_corpus(cc);
               set_threads(saved);
           }, 2),
           seconds_of([&] { generate_corpus(cc); }, 2));

    return 0;
}
