#include <doctest.h>

#include <atomic>
#include <vector>

#include "spotcd/citest.hpp"
#include "spotcd/parallel.hpp"
#include "spotcd/rng.hpp"
#include "spotcd/scm.hpp"

using namespace spotcd;

namespace {

struct ThreadGuard {
    ~ThreadGuard() { set_threads(0); }
};

}  // namespace

TEST_CASE("set_threads and threads round trip") {
    ThreadGuard guard;
    CHECK(hardware_threads() >= 1);
    set_threads(3);
    CHECK(threads() == 3);
    set_threads(1);
    CHECK(threads() == 1);
    set_threads(0);
    CHECK(threads() == hardware_threads());
}

TEST_CASE("parallel_for visits every index exactly once") {
    ThreadGuard guard;
    for (int tc : {1, 2, 5}) {
        set_threads(tc);
        for (std::ptrdiff_t n : {0, 1, 7, 1000}) {
            std::vector<std::atomic<int>> hits(static_cast<size_t>(n));
            parallel_for(n, [&](std::ptrdiff_t i) { hits[static_cast<size_t>(i)]++; });
            for (std::ptrdiff_t i = 0; i < n; ++i)
                REQUIRE(hits[static_cast<size_t>(i)].load() == 1);
        }
    }
}

TEST_CASE("parallel kernels match their serial references bitwise") {
    ThreadGuard guard;
    Rng rng(606);
    const int n = 500, d = 12;
    Eigen::MatrixXd X(n, d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) X(r, c) = rng.normal();

    Eigen::MatrixXd cov_ref = covariance_matrix_serial(X);
    CiCache cache{cov_ref, n};
    std::vector<CiQuery> queries;
    for (int t = 0; t < 200; ++t) {
        int i = rng.uniform_int(0, d - 1);
        int j = rng.uniform_int(0, d - 1);
        if (i == j) continue;
        std::vector<int> z;
        for (int v = 0; v < d; ++v)
            if (v != i && v != j && rng.uniform() < 0.2) z.push_back(v);
        queries.push_back({i, j, z});
    }
    std::vector<CiResult> ref = ci_batch_serial(cache, queries);

    for (int tc : {1, 2, 4}) {
        set_threads(tc);
        Eigen::MatrixXd cov = covariance_matrix(X);
        REQUIRE(cov == cov_ref);
        std::vector<CiResult> got = ci_batch(cache, queries);
        REQUIRE(got.size() == ref.size());
        for (size_t k = 0; k < ref.size(); ++k) {
            REQUIRE(got[k].p_value == ref[k].p_value);
            REQUIRE(got[k].statistic == ref[k].statistic);
            REQUIRE(got[k].partial_corr == ref[k].partial_corr);
        }
    }
}

TEST_CASE("corpus generation is thread-count invariant") {
    ThreadGuard guard;
    CorpusConfig cc;
    cc.count = 5;
    cc.d_range = {5, 9};
    cc.n = 60;
    cc.seed = 77;
    set_threads(1);
    std::vector<CorpusItem> a = generate_corpus(cc);
    set_threads(0);
    std::vector<CorpusItem> b = generate_corpus(cc);
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) {
        REQUIRE(a[k].graph == b[k].graph);
        REQUIRE(a[k].data.X == b[k].data.X);
        CHECK(a[k].seed == b[k].seed);
    }
}
