#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "spotcd/graph.hpp"
#include "spotcd/scm.hpp"

namespace spotcd {

// Ancestrality penalty h(delta, beta) = tr(exp(W_D)) - d + sum(exp(W_D) o W_B)
// with W_D = delta o delta and W_B = beta o beta (diagonal zeroed). h >= 0,
// and h = 0 exactly when the nonzero pattern is a bow-free ancestral ADMG.
double h_admg(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& beta);

// Value plus exact gradients via the block-matrix exponential. grad_beta is
// reported in pair convention: entry (i, j) holds the derivative with respect
// to the tied pair variable beta_ij = beta_ji (both entries equal).
void h_admg_gradient(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& beta,
                     double& h, Eigen::MatrixXd& grad_delta, Eigen::MatrixXd& grad_beta);

struct AlmState {
    double alpha = 0.0;
    double rho = 1.0;
};

// Per-node Gram reductions of the pseudo-variable regressions at a refresh
// point. Everything an objective evaluation needs, derived from the sample
// covariance alone.
struct PseudoState {
    int d = 0;
    std::vector<Eigen::MatrixXd> G;  // 2(d-1) x 2(d-1), regressors [X_{-i}; Z_{-i}]
    std::vector<Eigen::VectorXd> c;  // cross-covariances with X_i
    std::vector<Eigen::MatrixXd> M;  // (beta_{-i,-i})^-1 at the refresh point
    Eigen::VectorXd c_ii;
    Eigen::MatrixXd cov;  // the sample covariance itself, for likelihood evals
};

// Builds the state at (delta, beta). When refresh_diag is set, afterwards
// replaces each beta_ii by lambda_i + beta_{i,-i} M_i beta_{-i,i} computed
// from the snapshot (all nodes updated jointly).
PseudoState build_pseudo_state(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& delta,
                               Eigen::MatrixXd& beta, bool refresh_diag);

struct Objective {
    double value = 0.0;      // data + alpha h + rho h^2 / 2 + l1
    double data_term = 0.0;  // per-sample Gaussian negative log-likelihood
    double h = 0.0;
    Eigen::MatrixXd grad_delta;  // positional
    Eigen::MatrixXd grad_beta;   // pair convention, diagonal zero
};

// Augmented-Lagrangian objective and gradient at (delta, beta). The data term
// is the exact Gaussian likelihood; the pseudo-variable state supplies the
// covariance and the refreshed noise diagonal between argmins. The l1 term is
// lambda (||delta||_1 + ||beta||_1 off diagonal); its subgradient is taken as
// 0 at zeros, so grad_* covers the smooth part plus sign(x)-weighted l1 on
// nonzero coordinates.
Objective objective(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& beta,
                    const PseudoState& state, const AlmState& alm, double lambda);

struct AbicConfig {
    double lambda = 0.05;  // l1 weight
    double omega = 0.05;   // edge threshold
    int alm_steps = 20;
    int inner_steps = 10;   // pseudo-variable refreshes per outer step
    int max_opt_iter = 60;  // quasi-Newton iterations per inner argmin
    double rho_growth = 10.0;
    double h_shrink = 0.25;  // required per-outer constraint reduction
    double rho_cap = 1e12;
    double h_tol = 1e-9;
    double opt_tol = 1e-6;    // argmin stationarity (subgradient residual)
    double inner_tol = 1e-6;  // coordinate movement below this ends the inner loop
    bool standardize = true;
    double deadline_seconds = 0.0;  // 0 disables the deadline
    std::uint64_t seed = 0;
};

struct TraceRecord {
    int t_outer = 0;
    int t_inner = 0;
    double f = 0.0;  // objective after the accepted update, current state
    double h = 0.0;
    long accepted = 0;  // accepted coordinate updates this inner step
};

enum class FitStatus { Converged, MaxIterations, Diverged, Timeout };
const char* to_string(FitStatus s);

struct FitResult {
    ScmParams params;  // continuous estimate on the (standardized) scale
    Admg graph;        // thresholded ancestral concretization
    std::vector<TraceRecord> trace;
    FitStatus status = FitStatus::MaxIterations;
    double omega_used = 0.0;  // after the minimal ancestrality raise
    double final_h = 0.0;
    double final_f = 0.0;
};

// Coordinate update filter, invoked after each inner argmin. Receives the
// current point, the argmin proposal and the gradient at the current point;
// writes the accepted point and returns the number of accepted coordinate
// updates. A null filter accepts everything.
struct GuideContext {
    int t_outer = 0;
    int t_inner = 0;
    const Eigen::MatrixXd& current_delta;
    const Eigen::MatrixXd& current_beta;
    const Eigen::MatrixXd& proposed_delta;
    const Eigen::MatrixXd& proposed_beta;
    const Eigen::MatrixXd& grad_delta;  // at the current point
    const Eigen::MatrixXd& grad_beta;   // pair convention
};
using UpdateFilter =
    std::function<long(const GuideContext&, Eigen::MatrixXd&, Eigen::MatrixXd&)>;

// Thresholding: D(i,j) = |delta_ij| > omega, B(i,j) = |beta_ij| > omega or
// |beta_ji| > omega (i != j).
Admg threshold_to_admg(const ScmParams& params, double omega);

// Raises omega minimally (over the observed coefficient magnitudes) until the
// thresholded graph is ancestral; returns the graph and the omega used.
std::pair<Admg, double> threshold_to_ancestral(const ScmParams& params, double omega);

// Skeleton-constrained concretization: thresholds within the support, then
// force-retains one edge per skeleton pair, dominant coordinate first,
// keeping the graph ancestral.
Admg concretize_with_skeleton(const ScmParams& params, double omega,
                              const Eigen::MatrixXi& skeleton);

// ABIC fit: augmented-Lagrangian outer loop over pseudo-variable refreshes and
// quasi-Newton inner argmins. When skeleton is given, optimization is
// restricted to its support and every skeleton pair keeps an edge.
//
// The nonconvex landscape is basin-sensitive, so the fit races a few
// deterministic starts (directed-only presolve; a constraint-based warm start
// when the sample count n is known; a discrete reorientation of the winner)
// and reports the run with the best penalized likelihood. n = 0 disables the
// starts that need it.
FitResult abic_fit_cov(const Eigen::MatrixXd& cov, const AbicConfig& cfg = {},
                       const UpdateFilter& guide = nullptr,
                       const Eigen::MatrixXi* skeleton = nullptr, int n = 0);
FitResult abic_fit(const Dataset& data, const AbicConfig& cfg = {},
                   const UpdateFilter& guide = nullptr,
                   const Eigen::MatrixXi* skeleton = nullptr);

}  // namespace spotcd
