#include <doctest.h>

#include "oracles.hpp"
#include "spotcd/fci.hpp"

using namespace spotcd;

namespace {

Dataset collider_data(int n, std::uint64_t seed) {
    // 0 -> 2 <- 1
    ScmParams p = ScmParams::zero(3);
    p.delta(0, 2) = 1.0;
    p.delta(1, 2) = 1.0;
    p.beta.setIdentity();
    Rng rng(seed);
    return sample_dataset(p, n, rng);
}

}  // namespace

TEST_CASE("oracle ci answers with exact separation") {
    Admg g = Admg::empty(3);  // 0 -> 1 -> 2
    g.D(0, 1) = g.D(1, 2) = 1;
    CiFunction ci = oracle_ci(g);
    CHECK(ci(0, 2, {1}).p_value == 1.0);
    CHECK(ci(0, 2, {}).p_value == 0.0);
}

TEST_CASE("fci finds the collider from data") {
    Dataset data = collider_data(5000, 101);
    FciResult res = fci_learn(data);
    CHECK(res.pag.adjacent(0, 2));
    CHECK(res.pag.adjacent(1, 2));
    CHECK_FALSE(res.pag.adjacent(0, 1));
    CHECK(res.pag.mark(0, 2) == Mark::Arrow);
    CHECK(res.pag.mark(1, 2) == Mark::Arrow);
    CHECK(res.ci_tests > 0);
    // recorded sepset of the removed pair excludes the collider
    auto it = res.sepsets.find({0, 1});
    REQUIRE(it != res.sepsets.end());
    CHECK(it->second.empty());
}

TEST_CASE("single column degenerates to the empty graph") {
    Dataset data;
    data.X = Eigen::MatrixXd::Zero(10, 1);
    for (int i = 0; i < 10; ++i) data.X(i, 0) = static_cast<double>(i);
    data.names = {"only"};
    FciResult res = fci_learn(data);
    CHECK(res.pag.edge_count() == 0);
    CHECK(res.mag.edge_count() == 0);
}

TEST_CASE("degenerate alpha values pin the skeleton") {
    Dataset data = collider_data(400, 7);
    FciConfig sparse;
    sparse.alpha = 0.0;  // every test passes the removal bar
    CHECK(fci_learn(data, sparse).pag.edge_count() == 0);
    FciConfig dense;
    dense.alpha = 1.0;  // no p-value exceeds 1
    CHECK(fci_learn(data, dense).pag.edge_count() == 3);
}

TEST_CASE("fci with an oracle recovers the Markov equivalence class") {
    Rng rng(61);
    for (int trial = 0; trial < 12; ++trial) {
        int d = rng.uniform_int(4, 6);
        Admg mag = oracle::random_mag(d, rng);
        FciConfig cfg;
        cfg.max_cond_size = d;
        FciResult res = fci_learn_ci(d, oracle_ci(mag), cfg);
        CAPTURE(trial);
        REQUIRE(res.pag == mag_to_pag(mag));
        // the concretized MAG is itself a class member
        REQUIRE(is_ancestral(res.mag));
        REQUIRE(mag_to_pag(res.mag) == res.pag);
    }
}

TEST_CASE("possible-d-sep stage removes what the basic search keeps") {
    // MAG whose extra pair is only separable by a set outside both
    // neighborhoods after orientation; with the stage disabled the pair can
    // survive at small max_cond_size. The stage must never add edges.
    Rng rng(67);
    for (int trial = 0; trial < 8; ++trial) {
        int d = rng.uniform_int(4, 6);
        Admg mag = oracle::random_mag(d, rng);
        FciConfig with;
        with.max_cond_size = d;
        with.possible_dsep = true;
        FciConfig without = with;
        without.possible_dsep = false;
        auto skel_of_pag = [](const Pag& p) {
            Eigen::MatrixXi s = Eigen::MatrixXi::Zero(p.d, p.d);
            for (int i = 0; i < p.d; ++i)
                for (int j = 0; j < p.d; ++j)
                    if (i != j && p.adjacent(i, j)) s(i, j) = 1;
            return s;
        };
        Eigen::MatrixXi a = skel_of_pag(fci_learn_ci(d, oracle_ci(mag), with).pag);
        Eigen::MatrixXi b = skel_of_pag(fci_learn_ci(d, oracle_ci(mag), without).pag);
        REQUIRE(((b - a).array() >= 0).all());  // stage only removes
        REQUIRE(a == skeleton_of(mag));
    }
}

TEST_CASE("skeleton evidence records max p-values symmetrically") {
    Dataset data = collider_data(3000, 31);
    SkeletonEvidence ev = fci_skeleton_with_pvalues(data);
    CHECK(ev.adj == ev.adj.transpose().eval());
    CHECK(ev.max_p == ev.max_p.transpose().eval());
    CHECK(ev.adj(0, 2) == 1);
    CHECK(ev.adj(1, 2) == 1);
    CHECK(ev.adj(0, 1) == 0);
    // retained edges carry small separation evidence; removed pairs large
    CHECK(ev.max_p(0, 2) < 0.01);
    CHECK(ev.max_p(0, 1) > 0.01);
    CHECK(ev.max_p.diagonal().isZero());
}

TEST_CASE("two independent columns yield the empty skeleton") {
    Rng rng(73);
    Dataset data;
    data.X = Eigen::MatrixXd(600, 2);
    for (int i = 0; i < data.X.rows(); ++i) {
        data.X(i, 0) = rng.normal();
        data.X(i, 1) = rng.normal();
    }
    data.names = {"a", "b"};
    SkeletonEvidence ev = fci_skeleton_with_pvalues(data);
    CHECK(ev.adj.sum() == 0);
}

TEST_CASE("skeleton is monotone in alpha on identical subset sequences") {
    Rng rng(79);
    GraphSamplerConfig gc;
    gc.d = 8;
    Admg g = sample_admg(gc, rng);
    ScmParams p = parameterize_scm(g, WeightRanges{}, rng);
    Dataset data = sample_dataset(p, 400, rng);
    FciConfig lo, hi;
    lo.max_cond_size = hi.max_cond_size = 0;  // only the empty set is tested
    lo.alpha = 0.001;
    hi.alpha = 0.2;
    Eigen::MatrixXi sparse = fci_skeleton_with_pvalues(data, lo).adj;
    Eigen::MatrixXi dense = fci_skeleton_with_pvalues(data, hi).adj;
    CHECK(((dense - sparse).array() >= 0).all());
}
