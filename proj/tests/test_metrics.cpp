#include <doctest.h>

#include <cmath>

#include "spotcd/metrics.hpp"

using namespace spotcd;

TEST_CASE("prf counts and undefined flags") {
    PrfStats s = prf_from_counts(3, 1, 2);
    CHECK(s.tpr == doctest::Approx(0.6));
    CHECK(s.fdr == doctest::Approx(0.25));
    // precision 0.75, recall 0.6 -> f1 = 2*.75*.6/1.35 = 2/3
    CHECK(s.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(s.f1_defined);

    PrfStats none = prf_from_counts(0, 0, 0);
    CHECK_FALSE(none.tpr_defined);
    CHECK_FALSE(none.fdr_defined);
    CHECK_FALSE(none.f1_defined);

    PrfStats no_pred = prf_from_counts(0, 0, 2);
    CHECK(no_pred.tpr_defined);
    CHECK(no_pred.tpr == 0.0);
    CHECK_FALSE(no_pred.fdr_defined);
}

TEST_CASE("pag metrics on identical graphs are perfect") {
    Pag p = Pag::empty(3);
    p.add_edge(0, 1, Mark::Tail, Mark::Arrow);
    p.add_edge(1, 2, Mark::Arrow, Mark::Arrow);
    PagMetrics m = pag_metrics(p, p);
    CHECK(m.skeleton.f1 == doctest::Approx(1.0));
    CHECK(m.arrowhead.f1 == doctest::Approx(1.0));
    CHECK(m.tail.f1 == doctest::Approx(1.0));
    CHECK(shd(p, p) == 0);
}

TEST_CASE("pag metrics hand example") {
    // truth: 0 -> 1 (tail at 0, arrow at 1), 1 <-> 2
    Pag truth = Pag::empty(3);
    truth.add_edge(0, 1, Mark::Tail, Mark::Arrow);
    truth.add_edge(1, 2, Mark::Arrow, Mark::Arrow);
    // prediction: 0 -> 1 correct, extra edge 0 o-o 2, missing 1 <-> 2
    Pag pred = Pag::empty(3);
    pred.add_edge(0, 1, Mark::Tail, Mark::Arrow);
    pred.add_edge(0, 2, Mark::Circle, Mark::Circle);

    PagMetrics m = pag_metrics(pred, truth);
    CHECK(m.skeleton.tp == 1);
    CHECK(m.skeleton.fp == 1);
    CHECK(m.skeleton.fn == 1);
    CHECK(m.skeleton.f1 == doctest::Approx(0.5));
    // arrowheads: truth has 3 (at 1 from 0, at 1 from 2, at 2 from 1),
    // prediction has 1 matching (at 1 from 0)
    CHECK(m.arrowhead.tp == 1);
    CHECK(m.arrowhead.fp == 0);
    CHECK(m.arrowhead.fn == 2);
    // tails: tail at 0 on 0-1 matches; nothing else
    CHECK(m.tail.tp == 1);
    CHECK(m.tail.fp == 0);
    CHECK(m.tail.fn == 0);
    // shd: one missing edge + one extra edge
    CHECK(shd(pred, truth) == 2);
}

TEST_CASE("shd counts mark mismatches once per pair") {
    Pag a = Pag::empty(2);
    a.add_edge(0, 1, Mark::Tail, Mark::Arrow);
    Pag b = Pag::empty(2);
    b.add_edge(0, 1, Mark::Arrow, Mark::Arrow);
    CHECK(shd(a, b) == 1);
}

TEST_CASE("posterior quality hand example") {
    // pairs (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
    // scores  .9   .8   .7    .1    .6   .2
    // labels   1    0    1     0     0    1
    Eigen::MatrixXd post = Eigen::MatrixXd::Zero(4, 4);
    auto set = [&](int i, int j, double v) { post(i, j) = post(j, i) = v; };
    set(0, 1, 0.9);
    set(0, 2, 0.8);
    set(0, 3, 0.7);
    set(1, 2, 0.1);
    set(1, 3, 0.6);
    set(2, 3, 0.2);
    Eigen::MatrixXi skel = Eigen::MatrixXi::Zero(4, 4);
    auto edge = [&](int i, int j) { skel(i, j) = skel(j, i) = 1; };
    edge(0, 1);
    edge(0, 3);
    edge(2, 3);

    PosteriorQuality q = posterior_quality(post, skel);
    REQUIRE(q.defined);
    // concordant score pairs: 6 of 9
    CHECK(q.auroc == doctest::Approx(2.0 / 3.0));
    // average precision at thresholds .9/.7/.2: 1/3*(1) + 1/3*(2/3) + 1/3*(3/5)
    CHECK(q.auprc == doctest::Approx(34.0 / 45.0));
    // mean Bernoulli cross-entropy:
    // (-ln.9 - ln.2 - ln.7 - ln.9 - ln.4 - ln.2)/6
    CHECK(q.kl == doctest::Approx(0.7837604).epsilon(1e-6));
}

TEST_CASE("posterior quality degenerate and perfect cases") {
    Eigen::MatrixXd post = Eigen::MatrixXd::Zero(2, 2);
    post(0, 1) = post(1, 0) = 0.5;
    Eigen::MatrixXi skel = Eigen::MatrixXi::Zero(2, 2);
    skel(0, 1) = skel(1, 0) = 1;
    PosteriorQuality q = posterior_quality(post, skel);
    CHECK_FALSE(q.defined);  // single-class truth
    CHECK(q.kl == doctest::Approx(std::log(2.0)));

    Eigen::MatrixXi s3 = Eigen::MatrixXi::Zero(3, 3);
    s3(0, 1) = s3(1, 0) = 1;
    Eigen::MatrixXd perfect = s3.cast<double>();
    PosteriorQuality qp = posterior_quality(perfect, s3);
    REQUIRE(qp.defined);
    CHECK(qp.auroc == doctest::Approx(1.0));
    CHECK(qp.auprc == doctest::Approx(1.0));
    CHECK(qp.kl < 1e-5);
}

TEST_CASE("posterior quality ties get average ranks") {
    Eigen::MatrixXd post = Eigen::MatrixXd::Constant(3, 3, 0.4);
    post.diagonal().setZero();
    Eigen::MatrixXi skel = Eigen::MatrixXi::Zero(3, 3);
    skel(0, 1) = skel(1, 0) = 1;
    PosteriorQuality q = posterior_quality(post, skel);
    REQUIRE(q.defined);
    CHECK(q.auroc == doctest::Approx(0.5));  // all tied
}
