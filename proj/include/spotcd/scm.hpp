#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spotcd/graph.hpp"
#include "spotcd/rng.hpp"

namespace spotcd {

// Linear Gaussian SCM over an ADMG: delta(i, j) is the weight of i -> j,
// beta is the symmetric error covariance with beta(i, j) != 0 iff i <-> j.
struct ScmParams {
    int d = 0;
    Eigen::MatrixXd delta;
    Eigen::MatrixXd beta;

    static ScmParams zero(int d);
};

enum class Topology { Er, ScaleFree };

struct GraphSamplerConfig {
    int d = 30;
    std::pair<double, double> indegree_range = {1.0, 1.5};
    std::pair<double, double> bidirected_fraction_range = {0.05, 0.15};
    Topology topology = Topology::Er;
};

struct WeightRanges {
    std::pair<double, double> delta_mag = {0.5, 2.0};
    std::pair<double, double> beta_offdiag_mag = {0.4, 0.7};
    std::pair<double, double> beta_diag_base = {0.7, 1.2};
};

struct Dataset {
    Eigen::MatrixXd X;  // n rows, d columns
    std::vector<std::string> names;

    int n() const { return static_cast<int>(X.rows()); }
    int d() const { return static_cast<int>(X.cols()); }
};

void validate(const Dataset& data);
std::vector<std::string> default_names(int d);

// Random ancestral ADMG: directed edges oriented along a random topological
// order, bidirected edges between non-adjacent pairs rejecting any that would
// create an almost directed cycle. Total edge budget is
// round(d * mean(indegree_range)); the bidirected share is drawn uniformly
// from bidirected_fraction_range.
Admg sample_admg(const GraphSamplerConfig& cfg, Rng& rng);

// Edge weights: |delta| ~ U(delta_mag) with random sign, bidirected
// beta(i, j) ~ U(beta_offdiag_mag) with random sign, and
// beta(i, i) = U(beta_diag_base) + sum_j |beta(i, j)| so beta is strictly
// diagonally dominant, hence positive definite.
ScmParams parameterize_scm(const Admg& g, const WeightRanges& ranges, Rng& rng);

// Sigma = (I - delta)^-T beta (I - delta)^-1. Throws on a singular I - delta.
Eigen::MatrixXd implied_covariance(const ScmParams& params);

enum class SamplePath { Structural, Covariance };

// n >= 1 rows from the SCM. The structural path draws eps ~ N(0, beta) and
// solves the equations; the covariance path factorizes the implied Sigma.
Dataset sample_dataset(const ScmParams& params, int n, Rng& rng,
                       SamplePath path = SamplePath::Structural);

struct CorpusConfig {
    int count = 200;
    std::pair<int, int> d_range = {20, 50};
    int n = 1000;
    GraphSamplerConfig graph;  // d is drawn per item from d_range
    WeightRanges ranges;
    std::uint64_t seed = 0;
};

struct CorpusItem {
    Admg graph;
    ScmParams params;
    Dataset data;
    std::uint64_t seed = 0;  // derived stream id for this item
};

// Items are generated in parallel, one derived RNG stream per item, so the
// corpus is identical for every thread count.
std::vector<CorpusItem> generate_corpus(const CorpusConfig& cfg);

}  // namespace spotcd
