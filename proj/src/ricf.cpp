#include "spotcd/ricf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spotcd/citest.hpp"

namespace spotcd {

namespace {

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& m, const char* what) {
    const int k = static_cast<int>(m.rows());
    double ridge = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd work = m;
        if (ridge > 0.0) work.diagonal().array() += ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(work);
        if (ldlt.info() == Eigen::Success) {
            Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
            if (inv.allFinite()) return inv;
        }
        ridge = (ridge == 0.0) ? 1e-8 : ridge * 10.0;
    }
    throw std::runtime_error(std::string("ricf: singular matrix in ") + what);
}

Eigen::VectorXd solve_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& c) {
    double ridge = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd work = G;
        if (ridge > 0.0) work.diagonal().array() += ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(work);
        if (ldlt.info() == Eigen::Success) {
            Eigen::VectorXd a = ldlt.solve(c);
            if (a.allFinite()) return a;
        }
        ridge = (ridge == 0.0) ? 1e-8 : ridge * 10.0;
    }
    throw std::runtime_error("ricf: singular regression system");
}

}  // namespace

double gaussian_loglik(const ScmParams& params, const Eigen::MatrixXd& S, int n) {
    const int d = params.d;
    Eigen::MatrixXd sigma = implied_covariance(params);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("gaussian_loglik: implied covariance not positive definite");
    double logdet = 0.0;
    for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    const double trace_term = llt.solve(S).trace();
    return -0.5 * n * (d * std::log(2.0 * M_PI) + logdet + trace_term);
}

RicfResult ricf_fit_cov(const Eigen::MatrixXd& cov, int n, const Admg& g,
                        const RicfConfig& cfg) {
    const int d = g.d;
    if (cov.rows() != d || cov.cols() != d)
        throw std::invalid_argument("ricf_fit_cov: covariance/graph dimension mismatch");
    if (!is_ancestral(g) || !is_bow_free(g))
        throw std::invalid_argument("ricf_fit_cov: graph must be bow-free ancestral");

    RicfResult res;
    res.params = ScmParams::zero(d);
    Eigen::MatrixXd& delta = res.params.delta;
    Eigen::MatrixXd& beta = res.params.beta;
    beta.diagonal() = cov.diagonal();

    std::vector<std::vector<int>> parents(d), siblings(d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            if (k == i) continue;
            if (g.D(k, i)) parents[i].push_back(k);
            if (g.B(k, i)) siblings[i].push_back(k);
        }

    for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
        double max_change = 0.0;
        for (int i = 0; i < d; ++i) {
            const auto& pa = parents[i];
            const auto& sib = siblings[i];
            const int np = static_cast<int>(pa.size());
            const int ns = static_cast<int>(sib.size());
            if (np == 0 && ns == 0) {
                max_change = std::max(max_change, std::abs(beta(i, i) - cov(i, i)));
                beta(i, i) = cov(i, i);
                continue;
            }

            std::vector<int> others;
            others.reserve(d - 1);
            for (int k = 0; k < d; ++k)
                if (k != i) others.push_back(k);
            const int m = d - 1;

            Eigen::MatrixXd G(np + ns, np + ns);
            Eigen::VectorXd c(np + ns);
            Eigen::MatrixXd M_sib;  // columns of (beta_oo)^-1 for siblings

            for (int a = 0; a < np; ++a) {
                for (int b = 0; b < np; ++b) G(a, b) = cov(pa[a], pa[b]);
                c(a) = cov(pa[a], i);
            }
            if (ns > 0) {
                Eigen::MatrixXd beta_oo(m, m);
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b) beta_oo(a, b) = beta(others[a], others[b]);
                Eigen::MatrixXd M = invert_spd(beta_oo, "pseudo-variable construction");
                M_sib.resize(m, ns);
                for (int s = 0; s < ns; ++s) {
                    int col = 0;
                    while (others[col] != sib[s]) ++col;
                    M_sib.col(s) = M.col(col);
                }
                // K restricted to columns `others`: K(:, k) = e_k - delta(:, k)
                Eigen::MatrixXd Ko(d, m);
                for (int b = 0; b < m; ++b) {
                    Ko.col(b) = -delta.col(others[b]);
                    Ko(others[b], b) += 1.0;
                }
                Eigen::MatrixXd CKo = cov * Ko;              // d x m
                Eigen::MatrixXd Eoo = Ko.transpose() * CKo;  // m x m
                Eigen::MatrixXd ZZ = M_sib.transpose() * Eoo * M_sib;
                Eigen::VectorXd cz = M_sib.transpose() * (Ko.transpose() * cov.col(i));
                for (int a = 0; a < np; ++a) {
                    Eigen::RowVectorXd ck_row(m);
                    for (int b = 0; b < m; ++b) ck_row(b) = CKo(pa[a], b);
                    Eigen::RowVectorXd xz = ck_row * M_sib;
                    for (int s = 0; s < ns; ++s) {
                        G(a, np + s) = xz(s);
                        G(np + s, a) = xz(s);
                    }
                }
                G.block(np, np, ns, ns) = ZZ;
                c.segment(np, ns) = cz;
            }

            Eigen::VectorXd a = solve_gram(G, c);
            double lambda = cov(i, i) - 2.0 * a.dot(c) + a.dot(G * a);
            lambda = std::max(lambda, 1e-10);

            for (int p = 0; p < np; ++p) {
                max_change = std::max(max_change, std::abs(delta(pa[p], i) - a(p)));
                delta(pa[p], i) = a(p);
            }
            double beta_ii = lambda;
            if (ns > 0) {
                Eigen::VectorXd b = a.segment(np, ns);
                Eigen::MatrixXd M_ss(ns, ns);
                for (int s = 0; s < ns; ++s) {
                    int row = 0;
                    while (others[row] != sib[s]) ++row;
                    for (int t = 0; t < ns; ++t) M_ss(s, t) = M_sib(row, t);
                }
                beta_ii += b.dot(M_ss * b);
                for (int s = 0; s < ns; ++s) {
                    max_change = std::max(max_change, std::abs(beta(sib[s], i) - b(s)));
                    beta(sib[s], i) = b(s);
                    beta(i, sib[s]) = b(s);
                }
            }
            max_change = std::max(max_change, std::abs(beta(i, i) - beta_ii));
            beta(i, i) = beta_ii;
        }

        res.iterations = sweep + 1;
        double ll;
        try {
            ll = gaussian_loglik(res.params, cov, n);
        } catch (const std::runtime_error&) {
            ll = std::numeric_limits<double>::quiet_NaN();
        }
        res.sweep_loglik.push_back(ll);
        if (max_change < cfg.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

RicfResult ricf_fit(const Dataset& data, const Admg& g, const RicfConfig& cfg) {
    validate(data);
    Eigen::MatrixXd cov = covariance_matrix(data.X);
    return ricf_fit_cov(cov, static_cast<int>(data.X.rows()), g, cfg);
}

}  // namespace spotcd
