#include <doctest.h>

#include <Eigen/Cholesky>
#include <cmath>

#include "spotcd/parallel.hpp"
#include "spotcd/scm.hpp"

using namespace spotcd;

TEST_CASE("sample_admg draws valid ancestral graphs with the edge budget") {
    Rng rng(5);
    GraphSamplerConfig cfg;
    cfg.d = 25;
    for (int t = 0; t < 10; ++t) {
        Admg g = sample_admg(cfg, rng);
        REQUIRE(g.d == 25);
        CHECK_NOTHROW(validate(g));
        CHECK(is_ancestral(g));
        CHECK(is_bow_free(g));
        // budget: round(d * mean(indegree_range)) = round(25 * 1.25)
        CHECK(g.edge_count() == 31);
    }
}

TEST_CASE("sample_admg is deterministic in the seed") {
    GraphSamplerConfig cfg;
    cfg.d = 20;
    Rng a(77), b(77);
    CHECK(sample_admg(cfg, a) == sample_admg(cfg, b));
}

TEST_CASE("scale-free topology skews the degree distribution") {
    GraphSamplerConfig cfg;
    cfg.d = 40;
    cfg.topology = Topology::ScaleFree;
    Rng rng(3);
    Admg g = sample_admg(cfg, rng);
    CHECK(is_ancestral(g));
    Eigen::MatrixXi s = skeleton_of(g);
    int max_deg = 0;
    for (int i = 0; i < g.d; ++i) max_deg = std::max(max_deg, (int)s.row(i).sum());
    CHECK(max_deg >= 5);  // hubs appear; an ER draw at this budget stays flatter
}

TEST_CASE("parameterize_scm respects supports and ranges") {
    Rng rng(11);
    GraphSamplerConfig cfg;
    cfg.d = 15;
    Admg g = sample_admg(cfg, rng);
    WeightRanges ranges;
    ScmParams p = parameterize_scm(g, ranges, rng);
    REQUIRE(p.d == g.d);
    for (int i = 0; i < g.d; ++i)
        for (int j = 0; j < g.d; ++j) {
            if (g.D(i, j)) {
                CHECK(std::abs(p.delta(i, j)) >= ranges.delta_mag.first);
                CHECK(std::abs(p.delta(i, j)) <= ranges.delta_mag.second);
            } else {
                CHECK(p.delta(i, j) == 0.0);
            }
            if (i != j) {
                if (g.B(i, j)) {
                    CHECK(std::abs(p.beta(i, j)) >= ranges.beta_offdiag_mag.first);
                    CHECK(std::abs(p.beta(i, j)) <= ranges.beta_offdiag_mag.second);
                } else {
                    CHECK(p.beta(i, j) == 0.0);
                }
            }
        }
    CHECK(p.beta == p.beta.transpose().eval());
    Eigen::LLT<Eigen::MatrixXd> llt(p.beta);
    CHECK(llt.info() == Eigen::Success);  // diagonally dominant construction
}

TEST_CASE("implied covariance closed form for a single edge") {
    // 0 -> 1 with weight w and unit noise: Sigma = [[1, w], [w, 1 + w^2]]
    double w = 0.8;
    ScmParams p = ScmParams::zero(2);
    p.delta(0, 1) = w;
    p.beta.setIdentity();
    Eigen::MatrixXd sigma = implied_covariance(p);
    CHECK(sigma(0, 0) == doctest::Approx(1.0));
    CHECK(sigma(0, 1) == doctest::Approx(w));
    CHECK(sigma(1, 0) == doctest::Approx(w));
    CHECK(sigma(1, 1) == doctest::Approx(1.0 + w * w));
}

TEST_CASE("sampled covariance approaches the implied covariance") {
    Rng rng(13);
    GraphSamplerConfig cfg;
    cfg.d = 8;
    Admg g = sample_admg(cfg, rng);
    ScmParams p = parameterize_scm(g, WeightRanges{}, rng);
    Eigen::MatrixXd sigma = implied_covariance(p);
    Dataset data = sample_dataset(p, 200000, rng);
    Eigen::MatrixXd centered = data.X.rowwise() - data.X.colwise().mean();
    Eigen::MatrixXd s = centered.transpose() * centered / (data.n() - 1.0);
    CHECK((s - sigma).cwiseAbs().maxCoeff() < 0.12);

    Rng rng2(13);
    sample_admg(cfg, rng2);  // advance identically
    parameterize_scm(g, WeightRanges{}, rng2);
    Dataset cov_path = sample_dataset(p, 200000, rng2, SamplePath::Covariance);
    Eigen::MatrixXd c2 = cov_path.X.rowwise() - cov_path.X.colwise().mean();
    Eigen::MatrixXd s2 = c2.transpose() * c2 / (cov_path.n() - 1.0);
    CHECK((s2 - sigma).cwiseAbs().maxCoeff() < 0.12);
}

TEST_CASE("sample_dataset is deterministic and shape-correct") {
    ScmParams p = ScmParams::zero(3);
    p.delta(0, 1) = 1.0;
    p.beta.setIdentity();
    Rng a(9), b(9);
    Dataset da = sample_dataset(p, 50, a);
    Dataset db = sample_dataset(p, 50, b);
    CHECK(da.X == db.X);
    CHECK(da.names == std::vector<std::string>{"V0", "V1", "V2"});
    Rng c(10);
    Dataset one = sample_dataset(p, 1, c);
    CHECK(one.n() == 1);
    CHECK_THROWS_AS(sample_dataset(p, 0, c), std::invalid_argument);
}

TEST_CASE("dataset validation") {
    Dataset d;
    d.X = Eigen::MatrixXd::Zero(3, 2);
    d.names = {"a", "b"};
    CHECK_NOTHROW(validate(d));
    d.names = {"a"};
    CHECK_THROWS_AS(validate(d), std::invalid_argument);
    d.names = {"a", "b"};
    d.X(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate(d), std::invalid_argument);
}

TEST_CASE("generate_corpus is reproducible and thread-count invariant") {
    CorpusConfig cfg;
    cfg.count = 6;
    cfg.d_range = {5, 10};
    cfg.n = 40;
    cfg.seed = 21;
    set_threads(1);
    auto serial = generate_corpus(cfg);
    set_threads(0);
    auto parallel = generate_corpus(cfg);
    REQUIRE(serial.size() == 6);
    for (size_t k = 0; k < serial.size(); ++k) {
        CHECK(serial[k].graph == parallel[k].graph);
        CHECK(serial[k].data.X == parallel[k].data.X);
        CHECK(serial[k].seed == parallel[k].seed);
        CHECK(serial[k].graph.d >= 5);
        CHECK(serial[k].graph.d <= 10);
        CHECK(serial[k].data.n() == 40);
    }
}
