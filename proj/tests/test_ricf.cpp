#include <doctest.h>

#include <cmath>

#include "spotcd/ricf.hpp"

using namespace spotcd;

namespace {

Admg random_dag(int d, double p, Rng& rng) {
    std::vector<int> order(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) order[static_cast<size_t>(i)] = i;
    rng.shuffle(order);
    Admg g = Admg::empty(d);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (rng.uniform() < p) g.D(order[static_cast<size_t>(a)], order[static_cast<size_t>(b)]) = 1;
    return g;
}

// Bow-free ancestral fixture with both edge kinds:
// 0 -> 1 -> 3, 0 -> 2, 2 <-> 3, 1 <-> 4
ScmParams mixed_fixture() {
    ScmParams p = ScmParams::zero(5);
    p.delta(0, 1) = 1.1;
    p.delta(1, 3) = -0.8;
    p.delta(0, 2) = 0.6;
    p.beta.setIdentity();
    p.beta(2, 3) = p.beta(3, 2) = 0.45;
    p.beta(1, 4) = p.beta(4, 1) = -0.4;
    p.beta(1, 1) = 1.3;
    p.beta(3, 3) = 1.2;
    return p;
}

Admg support_of(const ScmParams& p) {
    Admg g = Admg::empty(p.d);
    for (int i = 0; i < p.d; ++i)
        for (int j = 0; j < p.d; ++j) {
            if (p.delta(i, j) != 0.0) g.D(i, j) = 1;
            if (i != j && p.beta(i, j) != 0.0) g.B(i, j) = 1;
        }
    return g;
}

}  // namespace

TEST_CASE("gaussian loglik closed form at the identity") {
    ScmParams p = ScmParams::zero(4);
    p.beta.setIdentity();
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
    double ll = gaussian_loglik(p, s, 100);
    CHECK(ll == doctest::Approx(-50.0 * 4.0 * (std::log(2.0 * M_PI) + 1.0)));
}

TEST_CASE("gaussian loglik peaks when the model matches the sample covariance") {
    ScmParams p = mixed_fixture();
    Eigen::MatrixXd sigma = implied_covariance(p);
    double at_truth = gaussian_loglik(p, sigma, 500);
    ScmParams scaled = p;
    scaled.beta *= 1.3;
    CHECK(gaussian_loglik(scaled, sigma, 500) < at_truth);
    scaled.beta = p.beta * 0.8;
    CHECK(gaussian_loglik(scaled, sigma, 500) < at_truth);
}

TEST_CASE("gaussian loglik rejects non-PD models") {
    ScmParams p = ScmParams::zero(2);
    p.beta << 1.0, 2.0, 2.0, 1.0;  // indefinite
    CHECK_THROWS_AS(gaussian_loglik(p, Eigen::MatrixXd::Identity(2, 2), 10),
                    std::runtime_error);
}

TEST_CASE("ricf on a DAG reproduces per-node OLS exactly") {
    Rng rng(41);
    for (int t = 0; t < 5; ++t) {
        Admg g = random_dag(6, 0.4, rng);
        ScmParams truth = parameterize_scm(g, WeightRanges{}, rng);
        Eigen::MatrixXd sigma = implied_covariance(truth);
        RicfResult r = ricf_fit_cov(sigma, 1000, g);
        REQUIRE(r.converged);
        CHECK(r.iterations == 2);  // one working sweep, one to observe the fixpoint
        // OLS on the exact covariance recovers the generating coefficients.
        CHECK((r.params.delta - truth.delta).cwiseAbs().maxCoeff() < 1e-8);
        for (int i = 0; i < g.d; ++i)
            CHECK(r.params.beta(i, i) == doctest::Approx(truth.beta(i, i)).epsilon(1e-8));
    }
}

TEST_CASE("ricf recovers mixed-graph parameters from the exact covariance") {
    ScmParams truth = mixed_fixture();
    Admg g = support_of(truth);
    REQUIRE(is_ancestral(g));
    REQUIRE(is_bow_free(g));
    RicfResult r = ricf_fit_cov(implied_covariance(truth), 2000, g);
    REQUIRE(r.converged);
    CHECK((r.params.delta - truth.delta).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((r.params.beta - truth.beta).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("ricf recovers parameters from a large sample within 5 percent") {
    ScmParams truth = mixed_fixture();
    Admg g = support_of(truth);
    Rng rng(47);
    Dataset data = sample_dataset(truth, 100000, rng);
    RicfResult r = ricf_fit(data, g);
    REQUIRE(r.converged);
    for (int i = 0; i < truth.d; ++i)
        for (int j = 0; j < truth.d; ++j) {
            if (truth.delta(i, j) != 0.0)
                CHECK(std::abs(r.params.delta(i, j) - truth.delta(i, j)) <
                      0.05 * std::abs(truth.delta(i, j)));
            if (i < j && truth.beta(i, j) != 0.0)
                CHECK(std::abs(r.params.beta(i, j) - truth.beta(i, j)) <
                      0.05 * std::abs(truth.beta(i, j)));
        }
}

TEST_CASE("per-sweep likelihood is monotone") {
    ScmParams truth = mixed_fixture();
    Admg g = support_of(truth);
    Rng rng(53);
    Dataset data = sample_dataset(truth, 2000, rng);
    RicfResult r = ricf_fit(data, g);
    REQUIRE(r.converged);
    REQUIRE(r.sweep_loglik.size() >= 2);
    for (size_t k = 1; k < r.sweep_loglik.size(); ++k) {
        REQUIRE(std::isfinite(r.sweep_loglik[k]));
        CHECK(r.sweep_loglik[k] >= r.sweep_loglik[k - 1] - 1e-7);
    }
}

TEST_CASE("ricf respects max_iter and reports non-convergence") {
    ScmParams truth = mixed_fixture();
    Admg g = support_of(truth);
    Rng rng(59);
    Dataset data = sample_dataset(truth, 1500, rng);
    RicfConfig cfg;
    cfg.max_iter = 1;
    RicfResult r = ricf_fit(data, g, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
}

TEST_CASE("ricf validates its graph preconditions") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2, 2);
    Admg bow = Admg::empty(2);
    bow.D(0, 1) = 1;
    bow.B(0, 1) = bow.B(1, 0) = 1;
    CHECK_THROWS_AS(ricf_fit_cov(s, 100, bow), std::invalid_argument);

    Admg cyc = Admg::empty(2);
    cyc.D(0, 1) = cyc.D(1, 0) = 1;
    CHECK_THROWS_AS(ricf_fit_cov(s, 100, cyc), std::invalid_argument);
}
