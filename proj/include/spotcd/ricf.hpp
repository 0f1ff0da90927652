#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spotcd/graph.hpp"
#include "spotcd/scm.hpp"

namespace spotcd {

// Gaussian log-likelihood of the SCM against a sample covariance S with n
// observations: -(n/2) (d ln(2 pi) + ln det Sigma + tr(Sigma^-1 S)).
// Throws std::runtime_error when the implied covariance is not positive
// definite.
double gaussian_loglik(const ScmParams& params, const Eigen::MatrixXd& S, int n);

struct RicfConfig {
    int max_iter = 100;
    double tol = 1e-6;
};

struct RicfResult {
    ScmParams params;
    bool converged = false;
    int iterations = 0;
    std::vector<double> sweep_loglik;  // one entry per completed sweep
};

// Residual iterative conditional fitting restricted to the support of g.
// Per-node regressions on parents plus pseudo-variables for bidirected
// neighbors, nodes swept in ascending order, started from delta = 0 and
// beta = diag(sample variances). Precondition: g is bow-free ancestral.
RicfResult ricf_fit(const Dataset& data, const Admg& g, const RicfConfig& cfg = {});
RicfResult ricf_fit_cov(const Eigen::MatrixXd& cov, int n, const Admg& g,
                        const RicfConfig& cfg = {});

}  // namespace spotcd
