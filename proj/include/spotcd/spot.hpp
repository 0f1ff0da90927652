#pragma once

#include <cstdint>

#include "spotcd/abic.hpp"

namespace spotcd {

struct SpotConfig {
    AbicConfig abic;
    double guide_c = 0.1;  // exploration constant added to the posterior
    bool sparsity_unconditional = true;
    std::uint64_t seed = 0;  // guide decision stream
};

// Probability of accepting a coordinate update for a pair with skeleton
// posterior p at 0-based outer step t: min(1, (p + c)^(1/(t+1))). The
// annealing exponent relaxes the filter toward accept-all as t grows.
double accept_probability(double p, double c, int t_outer);

// Posterior-guided coordinate filter. Each delta coordinate (i, j) draws its
// own decision (channel 0); each beta pair (i, j), i < j, draws one shared
// decision (channel 1). Draws are counter-based on
// (seed, t_outer, t_inner, i, j, channel), so decisions are independent of
// evaluation order. A delta update that shrinks the objective's sparsity
// direction (delta_ij * grad_ij > 0 at the current point) is accepted
// unconditionally when sparsity_unconditional is set. Beta diagonals are not
// filtered (they are refreshed, not optimized).
UpdateFilter make_guide(const Eigen::MatrixXd& posterior, const SpotConfig& cfg);

// ABIC fit with the posterior-guided update filter.
FitResult spot_fit_cov(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& posterior,
                       const SpotConfig& cfg = {}, const Eigen::MatrixXi* skeleton = nullptr);
FitResult spot_fit(const Dataset& data, const Eigen::MatrixXd& posterior,
                   const SpotConfig& cfg = {}, const Eigen::MatrixXi* skeleton = nullptr);

}  // namespace spotcd
