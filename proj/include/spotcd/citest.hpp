#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spotcd/scm.hpp"

namespace spotcd {

struct CiResult {
    double p_value = 1.0;
    double statistic = 0.0;
    double partial_corr = 0.0;
};

// Unnormalized-scale sample covariance (1/(n-1)); OpenMP over column pairs.
// Each entry is one full dot product, so the result is bitwise identical to
// the serial reference for any thread count.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& X);
Eigen::MatrixXd covariance_matrix_serial(const Eigen::MatrixXd& X);

// Shared read-only cache for a dataset's CI tests.
struct CiCache {
    Eigen::MatrixXd cov;
    int n = 0;
};

CiCache make_ci_cache(const Dataset& data);

// Fisher-z partial-correlation test of i _||_ j given z. The partial
// correlation comes from the inverse of the sub-covariance over {i, j} u z;
// statistic = sqrt(n - |z| - 3) * |atanh(r)|, p two-sided normal.
// Preconditions: i != j, endpoints not in z, no duplicates, n > |z| + 3.
// Throws std::runtime_error when the sub-covariance is singular.
CiResult fisher_z(const Eigen::MatrixXd& cov, int n, int i, int j, const std::vector<int>& z);

struct CiQuery {
    int i = 0, j = 0;
    std::vector<int> z;
};

// Batch kernel: parallel over queries against one shared cache.
std::vector<CiResult> ci_batch(const CiCache& cache, const std::vector<CiQuery>& queries);
std::vector<CiResult> ci_batch_serial(const CiCache& cache, const std::vector<CiQuery>& queries);

// Column standardization (mean 0, unit variance); near-constant columns are
// left at mean-centered values and reported through the returned flags.
std::vector<int> standardize_columns(Eigen::MatrixXd& X);

}  // namespace spotcd
