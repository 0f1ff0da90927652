#include "spotcd/abic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "spotcd/citest.hpp"
#include "spotcd/fci.hpp"
#include "spotcd/ricf.hpp"

namespace spotcd {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

MatrixXd squared_offdiag(const MatrixXd& m) {
    MatrixXd w = m.cwiseProduct(m);
    w.diagonal().setZero();
    return w;
}

MatrixXd invert_spd(const MatrixXd& m, const char* what) {
    const int k = static_cast<int>(m.rows());
    double ridge = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        MatrixXd work = m;
        if (ridge > 0.0) work.diagonal().array() += ridge;
        Eigen::LDLT<MatrixXd> ldlt(work);
        if (ldlt.info() == Eigen::Success) {
            MatrixXd inv = ldlt.solve(MatrixXd::Identity(k, k));
            if (inv.allFinite()) return inv;
        }
        ridge = (ridge == 0.0) ? 1e-8 : ridge * 10.0;
    }
    throw std::runtime_error(std::string("abic: singular matrix in ") + what);
}

// Regressor vector of node i: [delta(k,i); beta(k,i)] over k != i ascending.
void gather_coeffs(const MatrixXd& delta, const MatrixXd& beta, int i, VectorXd& a) {
    const int d = static_cast<int>(delta.rows());
    int t = 0;
    for (int k = 0; k < d; ++k) {
        if (k == i) continue;
        a(t) = delta(k, i);
        a(t + d - 1) = beta(k, i);
        ++t;
    }
}

// Exact per-sample Gaussian negative log-likelihood of the SCM at (delta,
// beta): with M = I - delta', the implied covariance is M^-1 beta M^-T, so
// -2 ll / n = log det beta - 2 log|det M| + tr(beta^-1 M C M') up to the
// constant. Returns +inf outside the PD region; the line search backtracks.
double data_term(const PseudoState& st, const MatrixXd& delta, const MatrixXd& beta,
                 MatrixXd* gd, MatrixXd* gb) {
    const int d = st.d;
    const double inf = std::numeric_limits<double>::infinity();
    const MatrixXd M = MatrixXd::Identity(d, d) - delta.transpose();
    Eigen::PartialPivLU<MatrixXd> lu(M);
    const double absdet = std::abs(lu.determinant());
    Eigen::LLT<MatrixXd> llt(beta);
    if (!(absdet > 1e-300) || llt.info() != Eigen::Success) return inf;
    double logdet_beta = 0.0;
    for (int i = 0; i < d; ++i) logdet_beta += 2.0 * std::log(llt.matrixLLT()(i, i));
    const MatrixXd MC = M * st.cov;
    const MatrixXd K = MC * M.transpose();
    const MatrixXd BinvK = llt.solve(K);
    const double val = 0.5 * (logdet_beta + BinvK.trace()) - std::log(absdet);
    if (!std::isfinite(val)) return inf;
    if (gd) {
        *gd += lu.inverse() - llt.solve(MC).transpose();
        const MatrixXd Binv = llt.solve(MatrixXd::Identity(d, d));
        *gb += 0.5 * (Binv - BinvK * Binv);
    }
    return val;
}

struct CoordMap {
    int d = 0;
    std::vector<std::pair<int, int>> dc;  // delta coordinates (i, j), i != j
    std::vector<std::pair<int, int>> bp;  // beta pairs (i, j), i < j
    int size() const { return static_cast<int>(dc.size() + bp.size()); }
};

CoordMap make_coord_map(int d, const Eigen::MatrixXi* skel) {
    CoordMap cm;
    cm.d = d;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && (!skel || (*skel)(i, j))) cm.dc.push_back({i, j});
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (!skel || (*skel)(i, j)) cm.bp.push_back({i, j});
    return cm;
}

void unpack_point(const CoordMap& cm, const VectorXd& x, MatrixXd& delta, MatrixXd& beta) {
    int t = 0;
    for (const auto& [i, j] : cm.dc) delta(i, j) = x(t++);
    for (const auto& [i, j] : cm.bp) {
        beta(i, j) = x(t);
        beta(j, i) = x(t);
        ++t;
    }
}

void pack_point(const CoordMap& cm, const MatrixXd& delta, const MatrixXd& beta, VectorXd& x) {
    int t = 0;
    for (const auto& [i, j] : cm.dc) x(t++) = delta(i, j);
    for (const auto& [i, j] : cm.bp) x(t++) = beta(i, j);
}

// Augmented-Lagrangian smooth part on the packed coordinate vector; beta's
// diagonal is held fixed. l1 is handled by the orthant-wise optimizer.
struct Evaluator {
    const PseudoState* st = nullptr;
    const CoordMap* cm = nullptr;
    AlmState alm;
    MatrixXd delta, beta;
    double last_h = 0.0;

    Evaluator(const PseudoState& s, const CoordMap& c, const AlmState& a,
              const VectorXd& beta_diag)
        : st(&s), cm(&c), alm(a) {
        delta = MatrixXd::Zero(s.d, s.d);
        beta = MatrixXd::Zero(s.d, s.d);
        beta.diagonal() = beta_diag;
    }

    double smooth_value(const VectorXd& x) {
        unpack_point(*cm, x, delta, beta);
        double val = data_term(*st, delta, beta, nullptr, nullptr);
        last_h = h_admg(delta, beta);
        return val + alm.alpha * last_h + 0.5 * alm.rho * last_h * last_h;
    }

    double smooth_value_grad(const VectorXd& x, VectorXd& g) {
        unpack_point(*cm, x, delta, beta);
        const int d = st->d;
        MatrixXd gd = MatrixXd::Zero(d, d);
        MatrixXd gb = MatrixXd::Zero(d, d);
        double val = data_term(*st, delta, beta, &gd, &gb);
        double h;
        MatrixXd gdh, gbh;
        h_admg_gradient(delta, beta, h, gdh, gbh);
        last_h = h;
        const double coeff = alm.alpha + alm.rho * h;
        gd += coeff * gdh;
        MatrixXd gb_pair = gb + gb.transpose() + coeff * gbh;
        g.resize(cm->size());
        int t = 0;
        for (const auto& [i, j] : cm->dc) g(t++) = gd(i, j);
        for (const auto& [i, j] : cm->bp) g(t++) = gb_pair(i, j);
        return val + alm.alpha * h + 0.5 * alm.rho * h * h;
    }
};

struct Deadline {
    bool enabled = false;
    std::chrono::steady_clock::time_point end;

    static Deadline after(double seconds) {
        Deadline d;
        if (seconds > 0.0) {
            d.enabled = true;
            d.end = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(seconds));
        }
        return d;
    }
    bool expired() const { return enabled && std::chrono::steady_clock::now() >= end; }
};

struct OwlqnResult {
    VectorXd x;
    VectorXd g0;  // smooth gradient at the start point
    bool stationary = false;
    bool hit_deadline = false;
};

// Orthant-wise limited-memory quasi-Newton minimization of
// smooth(x) + sum_k w_k |x_k|.
OwlqnResult owlqn(Evaluator& ev, const VectorXd& x0, const VectorXd& w, int max_iter,
                  double tol, const Deadline& dl) {
    const int n = static_cast<int>(x0.size());
    const int mem = 8;
    OwlqnResult res;
    VectorXd x = x0;
    VectorXd g(n);
    double fs = ev.smooth_value_grad(x, g);
    res.g0 = g;
    double F = fs + x.cwiseAbs().dot(w);

    std::deque<VectorXd> S, Y;
    std::deque<double> rho_inv;
    double gamma = 1.0;
    VectorXd pg(n), dir(n), xi(n), xn(n), gn(n);

    for (int iter = 0; iter < max_iter; ++iter) {
        if (dl.expired()) {
            res.hit_deadline = true;
            break;
        }
        for (int k = 0; k < n; ++k) {
            const double gk = g(k), wk = w(k), xk = x(k);
            if (xk > 0.0)
                pg(k) = gk + wk;
            else if (xk < 0.0)
                pg(k) = gk - wk;
            else if (gk + wk < 0.0)
                pg(k) = gk + wk;
            else if (gk - wk > 0.0)
                pg(k) = gk - wk;
            else
                pg(k) = 0.0;
        }
        if (pg.lpNorm<Eigen::Infinity>() < tol) {
            res.stationary = true;
            break;
        }
        const VectorXd v = -pg;
        dir = v;
        const int m = static_cast<int>(S.size());
        std::vector<double> al(m);
        for (int i = m - 1; i >= 0; --i) {
            al[i] = S[i].dot(dir) / rho_inv[i];
            dir -= al[i] * Y[i];
        }
        if (m > 0) dir *= gamma;
        for (int i = 0; i < m; ++i) {
            const double b = Y[i].dot(dir) / rho_inv[i];
            dir += S[i] * (al[i] - b);
        }
        for (int k = 0; k < n; ++k)
            if (dir(k) * v(k) <= 0.0) dir(k) = 0.0;
        if (dir.lpNorm<Eigen::Infinity>() == 0.0) break;

        for (int k = 0; k < n; ++k) xi(k) = x(k) != 0.0 ? sgn(x(k)) : sgn(v(k));
        double t = iter == 0 ? std::min(1.0, 1.0 / std::max(1e-12, v.norm())) : 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            xn = x + t * dir;
            for (int k = 0; k < n; ++k)
                if (xn(k) * xi(k) < 0.0) xn(k) = 0.0;
            const double fn = ev.smooth_value(xn) + xn.cwiseAbs().dot(w);
            const double dec = pg.dot(xn - x);
            if (std::isfinite(fn) && fn <= F + 1e-4 * dec && dec < 0.0) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;

        const double fsn = ev.smooth_value_grad(xn, gn);
        const VectorXd s = xn - x;
        const VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            S.push_back(s);
            Y.push_back(y);
            rho_inv.push_back(sy);
            gamma = sy / y.squaredNorm();
            if (static_cast<int>(S.size()) > mem) {
                S.pop_front();
                Y.pop_front();
                rho_inv.pop_front();
            }
        }
        x = xn;
        g = gn;
        F = fsn + xn.cwiseAbs().dot(w);
    }
    res.x = x;
    return res;
}

void check_skeleton(const Eigen::MatrixXi& skel, int d) {
    if (skel.rows() != d || skel.cols() != d)
        throw std::invalid_argument("abic: skeleton dimension mismatch");
    for (int i = 0; i < d; ++i) {
        if (skel(i, i) != 0) throw std::invalid_argument("abic: skeleton has a diagonal entry");
        for (int j = 0; j < d; ++j) {
            if (skel(i, j) != 0 && skel(i, j) != 1)
                throw std::invalid_argument("abic: skeleton entries must be 0/1");
            if (skel(i, j) != skel(j, i))
                throw std::invalid_argument("abic: skeleton must be symmetric");
        }
    }
}

}  // namespace

double h_admg(const MatrixXd& delta, const MatrixXd& beta) {
    const int d = static_cast<int>(delta.rows());
    MatrixXd wd = squared_offdiag(delta);
    MatrixXd wb = squared_offdiag(beta);
    MatrixXd e = wd.exp();
    return e.trace() - d + e.cwiseProduct(wb).sum();
}

void h_admg_gradient(const MatrixXd& delta, const MatrixXd& beta, double& h,
                     MatrixXd& grad_delta, MatrixXd& grad_beta) {
    const int d = static_cast<int>(delta.rows());
    MatrixXd wd = squared_offdiag(delta);
    MatrixXd wb = squared_offdiag(beta);
    MatrixXd blk = MatrixXd::Zero(2 * d, 2 * d);
    blk.topLeftCorner(d, d) = wd;
    blk.topRightCorner(d, d) = wb;
    blk.bottomRightCorner(d, d) = wd;
    MatrixXd f = blk.exp();
    MatrixXd expA = f.topLeftCorner(d, d);
    MatrixXd frechet = f.topRightCorner(d, d);
    h = expA.trace() - d + expA.cwiseProduct(wb).sum();
    grad_delta = (expA.transpose() + frechet.transpose()).cwiseProduct(2.0 * delta);
    grad_delta.diagonal().setZero();
    MatrixXd pos = expA.cwiseProduct(2.0 * beta);
    pos.diagonal().setZero();
    grad_beta = pos + pos.transpose();
}

PseudoState build_pseudo_state(const MatrixXd& cov, const MatrixXd& delta, MatrixXd& beta,
                               bool refresh_diag) {
    const int d = static_cast<int>(cov.rows());
    PseudoState st;
    st.d = d;
    st.c_ii = cov.diagonal();
    st.cov = cov;
    st.G.resize(d);
    st.c.resize(d);
    st.M.resize(d);

    MatrixXd K = MatrixXd::Identity(d, d) - delta;
    MatrixXd CK = cov * K;
    MatrixXd E = K.transpose() * CK;
    MatrixXd KtC = CK.transpose();  // K'C, since cov is symmetric

    const int m = d - 1;
    std::vector<int> others(m);
    for (int i = 0; i < d; ++i) {
        int t = 0;
        for (int k = 0; k < d; ++k)
            if (k != i) others[t++] = k;

        MatrixXd beta_oo(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) beta_oo(a, b) = beta(others[a], others[b]);
        st.M[i] = invert_spd(beta_oo, "pseudo-variable construction");

        MatrixXd cov_oo(m, m), ck_oo(m, m), e_oo(m, m);
        VectorXd c_x(m), ktc_oi(m);
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                cov_oo(a, b) = cov(others[a], others[b]);
                ck_oo(a, b) = CK(others[a], others[b]);
                e_oo(a, b) = E(others[a], others[b]);
            }
            c_x(a) = cov(others[a], i);
            ktc_oi(a) = KtC(others[a], i);
        }
        MatrixXd S = ck_oo * st.M[i];
        MatrixXd ZZ = st.M[i] * e_oo * st.M[i];
        st.G[i].resize(2 * m, 2 * m);
        st.G[i].topLeftCorner(m, m) = cov_oo;
        st.G[i].topRightCorner(m, m) = S;
        st.G[i].bottomLeftCorner(m, m) = S.transpose();
        st.G[i].bottomRightCorner(m, m) = ZZ;
        st.c[i].resize(2 * m);
        st.c[i].head(m) = c_x;
        st.c[i].tail(m) = st.M[i] * ktc_oi;
    }

    if (refresh_diag) {
        VectorXd new_diag(d);
        VectorXd a(2 * m);
        for (int i = 0; i < d; ++i) {
            gather_coeffs(delta, beta, i, a);
            double lambda = st.c_ii(i) - 2.0 * a.dot(st.c[i]) + a.dot(st.G[i] * a);
            lambda = std::max(lambda, 1e-10);
            VectorXd b = a.tail(m);
            new_diag(i) = lambda + b.dot(st.M[i] * b);
        }
        beta.diagonal() = new_diag;
    }
    return st;
}

Objective objective(const MatrixXd& delta, const MatrixXd& beta, const PseudoState& state,
                    const AlmState& alm, double lambda) {
    const int d = state.d;
    Objective obj;
    obj.grad_delta = MatrixXd::Zero(d, d);
    MatrixXd gb = MatrixXd::Zero(d, d);
    obj.data_term = data_term(state, delta, beta, &obj.grad_delta, &gb);
    if (!std::isfinite(obj.data_term))
        throw std::runtime_error("objective: likelihood undefined (non-PD beta or singular I - delta)");
    MatrixXd gdh, gbh;
    h_admg_gradient(delta, beta, obj.h, gdh, gbh);
    const double coeff = alm.alpha + alm.rho * obj.h;
    obj.grad_delta += coeff * gdh;
    obj.grad_beta = gb + gb.transpose() + coeff * gbh;
    obj.grad_beta.diagonal().setZero();

    double l1 = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            l1 += std::abs(delta(i, j)) + std::abs(beta(i, j));
            if (delta(i, j) != 0.0) obj.grad_delta(i, j) += lambda * sgn(delta(i, j));
            if (beta(i, j) != 0.0) obj.grad_beta(i, j) += lambda * sgn(beta(i, j));
        }
    obj.value = obj.data_term + alm.alpha * obj.h + 0.5 * alm.rho * obj.h * obj.h + lambda * l1;
    return obj;
}

const char* to_string(FitStatus s) {
    switch (s) {
        case FitStatus::Converged: return "converged";
        case FitStatus::MaxIterations: return "max_iterations";
        case FitStatus::Diverged: return "diverged";
        case FitStatus::Timeout: return "timeout";
    }
    return "unknown";
}

Admg threshold_to_admg(const ScmParams& params, double omega) {
    const int d = params.d;
    Admg g = Admg::empty(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && std::abs(params.delta(i, j)) > omega) g.D(i, j) = 1;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (std::abs(params.beta(i, j)) > omega || std::abs(params.beta(j, i)) > omega)
                g.B(i, j) = g.B(j, i) = 1;
    return g;
}

std::pair<Admg, double> threshold_to_ancestral(const ScmParams& params, double omega) {
    Admg g = threshold_to_admg(params, omega);
    if (is_ancestral(g)) return {g, omega};
    std::vector<double> mags;
    for (int i = 0; i < params.d; ++i)
        for (int j = 0; j < params.d; ++j) {
            if (i == j) continue;
            const double v = std::abs(params.delta(i, j));
            if (v > omega) mags.push_back(v);
            if (j > i) {
                const double b = std::max(std::abs(params.beta(i, j)), std::abs(params.beta(j, i)));
                if (b > omega) mags.push_back(b);
            }
        }
    std::sort(mags.begin(), mags.end());
    // Raising the threshold only removes edges, so ancestrality is monotone
    // along mags and the empty graph at the top is always feasible.
    int lo = 0, hi = static_cast<int>(mags.size()) - 1;
    while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (is_ancestral(threshold_to_admg(params, mags[mid])))
            hi = mid;
        else
            lo = mid + 1;
    }
    const double used = mags[lo];
    return {threshold_to_admg(params, used), used};
}

Admg concretize_with_skeleton(const ScmParams& params, double omega,
                              const Eigen::MatrixXi& skeleton) {
    const int d = params.d;
    check_skeleton(skeleton, d);
    auto [g, used] = threshold_to_ancestral(params, omega);
    (void)used;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            g.D(i, j) &= skeleton(i, j);
            g.B(i, j) &= skeleton(i, j);
        }
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (!skeleton(i, j) || g.adjacent(i, j)) continue;
            struct Cand {
                double mag;
                int kind;  // 0: i->j, 1: j->i, 2: i<->j
            };
            std::vector<Cand> cands = {{std::abs(params.delta(i, j)), 0},
                                       {std::abs(params.delta(j, i)), 1},
                                       {std::abs(params.beta(i, j)), 2}};
            std::stable_sort(cands.begin(), cands.end(),
                             [](const Cand& a, const Cand& b) { return a.mag > b.mag; });
            bool placed = false;
            for (const Cand& c : cands) {
                if (c.kind == 0)
                    g.D(i, j) = 1;
                else if (c.kind == 1)
                    g.D(j, i) = 1;
                else
                    g.B(i, j) = g.B(j, i) = 1;
                if (is_ancestral(g)) {
                    placed = true;
                    break;
                }
                if (c.kind == 0)
                    g.D(i, j) = 0;
                else if (c.kind == 1)
                    g.D(j, i) = 0;
                else
                    g.B(i, j) = g.B(j, i) = 0;
            }
            if (!placed) {
                Eigen::MatrixXi closure = ancestor_closure(g);
                if (closure(i, j))
                    g.D(i, j) = 1;
                else if (closure(j, i))
                    g.D(j, i) = 1;
                else
                    g.B(i, j) = g.B(j, i) = 1;
            }
        }
    }
    return g;
}

FitResult abic_fit_cov(const MatrixXd& cov, const AbicConfig& cfg, const UpdateFilter& guide,
                       const Eigen::MatrixXi* skeleton) {
    const int d = static_cast<int>(cov.rows());
    if (cov.rows() != cov.cols() || d < 2)
        throw std::invalid_argument("abic_fit_cov: covariance must be square with d >= 2");
    if (skeleton) check_skeleton(*skeleton, d);

    MatrixXd C = cov;
    if (cfg.standardize) {
        VectorXd inv_s = cov.diagonal().cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
        C = inv_s.asDiagonal() * cov * inv_s.asDiagonal();
    }

    const Deadline dl = Deadline::after(cfg.deadline_seconds);
    const CoordMap cm = make_coord_map(d, skeleton);
    const int nd = static_cast<int>(cm.dc.size());
    VectorXd w(cm.size());
    w.head(nd).setConstant(cfg.lambda);
    w.tail(cm.size() - nd).setConstant(2.0 * cfg.lambda);

    MatrixXd delta = MatrixXd::Zero(d, d);
    MatrixXd beta = MatrixXd::Zero(d, d);
    beta.diagonal() = C.diagonal();
    VectorXd x = VectorXd::Zero(cm.size());

    FitResult res;
    AlmState alm;
    double h_prev = std::numeric_limits<double>::infinity();
    bool done = false;

    for (int t1 = 0; t1 < cfg.alm_steps && !done; ++t1) {
        bool inner_converged = false;
        for (int t2 = 0; t2 < cfg.inner_steps; ++t2) {
            if (dl.expired()) {
                res.status = FitStatus::Timeout;
                done = true;
                break;
            }
            try {
                PseudoState st = build_pseudo_state(C, delta, beta, true);
                Evaluator ev(st, cm, alm, beta.diagonal());
                OwlqnResult om = owlqn(ev, x, w, cfg.max_opt_iter, cfg.opt_tol, dl);
                if (om.hit_deadline) {
                    res.status = FitStatus::Timeout;
                    done = true;
                    break;
                }

                MatrixXd prop_delta = delta, prop_beta = beta;
                unpack_point(cm, om.x, prop_delta, prop_beta);

                MatrixXd new_delta, new_beta;
                long accepted;
                if (guide) {
                    MatrixXd gd = MatrixXd::Zero(d, d), gb = MatrixXd::Zero(d, d);
                    int t = 0;
                    for (const auto& [i, j] : cm.dc) gd(i, j) = om.g0(t++);
                    for (const auto& [i, j] : cm.bp) {
                        gb(i, j) = om.g0(t);
                        gb(j, i) = om.g0(t);
                        ++t;
                    }
                    for (const auto& [i, j] : cm.dc)
                        if (delta(i, j) != 0.0) gd(i, j) += cfg.lambda * sgn(delta(i, j));
                    for (const auto& [i, j] : cm.bp)
                        if (beta(i, j) != 0.0) {
                            gb(i, j) += 2.0 * cfg.lambda * sgn(beta(i, j));
                            gb(j, i) = gb(i, j);
                        }
                    GuideContext ctx{t1, t2, delta, beta, prop_delta, prop_beta, gd, gb};
                    new_delta = delta;
                    new_beta = beta;
                    accepted = guide(ctx, new_delta, new_beta);
                    new_beta.diagonal() = beta.diagonal();
                    if (accepted > 0) {
                        // a partial acceptance can mix two feasible iterates into
                        // a point where the likelihood is undefined; pull it back
                        // toward the current iterate until it is inside again
                        double s = 1.0;
                        const MatrixXd dir_d = new_delta - delta;
                        const MatrixXd dir_b = new_beta - beta;
                        while (!std::isfinite(data_term(st, new_delta, new_beta, nullptr, nullptr))) {
                            s *= 0.5;
                            if (s < 1e-16) {
                                new_delta = delta;
                                new_beta = beta;
                                break;
                            }
                            new_delta = delta + s * dir_d;
                            new_beta = beta + s * dir_b;
                        }
                    }
                } else {
                    new_delta = prop_delta;
                    new_beta = prop_beta;
                    accepted = cm.size();
                }

                VectorXd xn(cm.size());
                pack_point(cm, new_delta, new_beta, xn);
                const double move = (xn - x).lpNorm<Eigen::Infinity>();
                delta = new_delta;
                beta = new_beta;
                x = xn;

                const double f_smooth = ev.smooth_value(x);
                const double f_val = f_smooth + x.cwiseAbs().dot(w);
                res.trace.push_back({t1, t2, f_val, ev.last_h, accepted});
                if (!std::isfinite(f_val) || !std::isfinite(ev.last_h)) {
                    res.status = FitStatus::Diverged;
                    done = true;
                    break;
                }
                if (move < cfg.inner_tol) {
                    inner_converged = true;
                    break;
                }
            } catch (const std::runtime_error&) {
                res.status = FitStatus::Diverged;
                done = true;
                break;
            }
        }
        if (done) break;

        const double h_end = h_admg(delta, beta);
        if (!std::isfinite(h_end) || h_end > 1e8) {
            res.status = FitStatus::Diverged;
            break;
        }
        if (h_end < cfg.h_tol && inner_converged) {
            res.status = FitStatus::Converged;
            break;
        }
        alm.alpha += alm.rho * h_end;
        if (h_end > cfg.h_shrink * h_prev) alm.rho = std::min(alm.rho * cfg.rho_growth, cfg.rho_cap);
        h_prev = h_end;
    }

    res.params = ScmParams{d, delta, beta};
    res.final_h = h_admg(delta, beta);
    res.final_f = res.trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : res.trace.back().f;
    if (skeleton) {
        res.graph = concretize_with_skeleton(res.params, cfg.omega, *skeleton);
        res.omega_used = cfg.omega;
    } else {
        auto [g, used] = threshold_to_ancestral(res.params, cfg.omega);
        res.graph = g;
        res.omega_used = used;
    }
    return res;
}

FitResult abic_fit(const Dataset& data, const AbicConfig& cfg, const UpdateFilter& guide,
                   const Eigen::MatrixXi* skeleton) {
    validate(data);
    return abic_fit_cov(covariance_matrix(data.X), cfg, guide, skeleton);
}

}  // namespace spotcd
