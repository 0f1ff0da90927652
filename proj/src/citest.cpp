#include "spotcd/citest.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spotcd/parallel.hpp"

namespace spotcd {

namespace {

Eigen::MatrixXd covariance_impl(const Eigen::MatrixXd& X, bool parallel) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    if (n < 2) throw std::invalid_argument("covariance: need n >= 2");
    Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
    Eigen::MatrixXd cov(d, d);
    auto body = [&](std::int64_t k) {
        int i = static_cast<int>(k / d);
        int j = static_cast<int>(k % d);
        if (j < i) return;
        double v = centered.col(i).dot(centered.col(j)) / static_cast<double>(n - 1);
        cov(i, j) = v;
        cov(j, i) = v;
    };
    if (parallel) {
        parallel_for(static_cast<std::int64_t>(d) * d, body);
    } else {
        for (std::int64_t k = 0; k < static_cast<std::int64_t>(d) * d; ++k) body(k);
    }
    return cov;
}

}  // namespace

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& X) { return covariance_impl(X, true); }

Eigen::MatrixXd covariance_matrix_serial(const Eigen::MatrixXd& X) {
    return covariance_impl(X, false);
}

CiCache make_ci_cache(const Dataset& data) {
    validate(data);
    CiCache cache;
    cache.cov = covariance_matrix(data.X);
    cache.n = data.n();
    return cache;
}

CiResult fisher_z(const Eigen::MatrixXd& cov, int n, int i, int j, const std::vector<int>& z) {
    const int d = static_cast<int>(cov.rows());
    if (i == j || i < 0 || j < 0 || i >= d || j >= d)
        throw std::invalid_argument("fisher_z: bad pair");
    const int k = static_cast<int>(z.size());
    if (n <= k + 3) throw std::invalid_argument("fisher_z: n must exceed |z| + 3");

    for (int a = 0; a < k; ++a) {
        if (z[a] < 0 || z[a] >= d) throw std::invalid_argument("fisher_z: z out of range");
        if (z[a] == i || z[a] == j) throw std::invalid_argument("fisher_z: endpoint in z");
        for (int b = a + 1; b < k; ++b)
            if (z[a] == z[b]) throw std::invalid_argument("fisher_z: duplicate index in z");
    }

    // Schur complement over the conditioning block, arranged so that swapping
    // the endpoints or relabeling the variables reproduces the same floats
    // bit for bit: cross terms are averaged and the z block keeps caller order.
    double sii = cov(i, i);
    double sjj = cov(j, j);
    double sij = 0.5 * (cov(i, j) + cov(j, i));
    if (k > 0) {
        Eigen::MatrixXd czz(k, k);
        Eigen::VectorXd czi(k), czj(k);
        for (int a = 0; a < k; ++a) {
            czi(a) = cov(z[a], i);
            czj(a) = cov(z[a], j);
            for (int b = 0; b < k; ++b) czz(a, b) = cov(z[a], z[b]);
        }
        Eigen::VectorXd xi, xj;
        Eigen::LLT<Eigen::MatrixXd> llt(czz);
        if (llt.info() == Eigen::Success) {
            xi = llt.solve(czi);
            xj = llt.solve(czj);
        } else {
            Eigen::LDLT<Eigen::MatrixXd> ldlt(czz);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
                throw std::runtime_error("fisher_z: singular conditioning covariance");
            xi = ldlt.solve(czi);
            xj = ldlt.solve(czj);
        }
        if (!xi.allFinite() || !xj.allFinite())
            throw std::runtime_error("fisher_z: singular conditioning covariance");
        sii -= czi.dot(xi);
        sjj -= czj.dot(xj);
        sij -= 0.5 * (czi.dot(xj) + czj.dot(xi));
    }

    const double denom = sii * sjj;
    if (!(sii > 0.0) || !(sjj > 0.0) || !(denom - sij * sij > 0.0))
        throw std::runtime_error("fisher_z: singular conditioning covariance");
    double r = sij / std::sqrt(denom);
    const double cap = 1.0 - 1e-12;
    r = std::clamp(r, -cap, cap);

    CiResult res;
    res.partial_corr = r;
    res.statistic = std::sqrt(static_cast<double>(n - k - 3)) * std::abs(std::atanh(r));
    res.p_value = std::erfc(res.statistic / std::sqrt(2.0));
    return res;
}

namespace {

std::vector<CiResult> ci_batch_impl(const CiCache& cache, const std::vector<CiQuery>& queries,
                                    bool parallel) {
    std::vector<CiResult> out(queries.size());
    auto body = [&](std::int64_t k) {
        const CiQuery& q = queries[k];
        out[k] = fisher_z(cache.cov, cache.n, q.i, q.j, q.z);
    };
    if (parallel) {
        parallel_for(static_cast<std::int64_t>(queries.size()), body);
    } else {
        for (std::int64_t k = 0; k < static_cast<std::int64_t>(queries.size()); ++k) body(k);
    }
    return out;
}

}  // namespace

std::vector<CiResult> ci_batch(const CiCache& cache, const std::vector<CiQuery>& queries) {
    return ci_batch_impl(cache, queries, true);
}

std::vector<CiResult> ci_batch_serial(const CiCache& cache, const std::vector<CiQuery>& queries) {
    return ci_batch_impl(cache, queries, false);
}

std::vector<int> standardize_columns(Eigen::MatrixXd& X) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    std::vector<int> degenerate;
    for (int c = 0; c < d; ++c) {
        double mean = X.col(c).mean();
        X.col(c).array() -= mean;
        double var = X.col(c).squaredNorm() / std::max(1, n - 1);
        if (var > 1e-12) {
            X.col(c) /= std::sqrt(var);
        } else {
            degenerate.push_back(c);
        }
    }
    return degenerate;
}

}  // namespace spotcd
