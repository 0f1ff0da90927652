#include "spotcd/spot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spotcd/citest.hpp"
#include "spotcd/rng.hpp"

namespace spotcd {

double accept_probability(double p, double c, int t_outer) {
    const double base = std::max(0.0, p + c);
    return std::min(1.0, std::pow(base, 1.0 / (t_outer + 1)));
}

namespace {

void check_posterior(const Eigen::MatrixXd& post) {
    const int d = static_cast<int>(post.rows());
    if (post.cols() != d) throw std::invalid_argument("spot: posterior must be square");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (!(post(i, j) >= -1e-9 && post(i, j) <= 1.0 + 1e-9))
                throw std::invalid_argument("spot: posterior entries must lie in [0, 1]");
            if (std::abs(post(i, j) - post(j, i)) > 1e-9)
                throw std::invalid_argument("spot: posterior must be symmetric");
        }
}

}  // namespace

UpdateFilter make_guide(const Eigen::MatrixXd& posterior, const SpotConfig& cfg) {
    check_posterior(posterior);
    const double c = cfg.guide_c;
    const bool uncond = cfg.sparsity_unconditional;
    const std::uint64_t seed = cfg.seed;
    return [posterior, c, uncond, seed](const GuideContext& ctx, Eigen::MatrixXd& out_delta,
                                        Eigen::MatrixXd& out_beta) -> long {
        const int d = static_cast<int>(posterior.rows());
        long accepted = 0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (i == j) continue;
                bool take = uncond && ctx.current_delta(i, j) * ctx.grad_delta(i, j) > 0.0;
                if (!take) {
                    const double u = counter_uniform(seed, ctx.t_outer, ctx.t_inner, i, j, 0);
                    take = u < accept_probability(posterior(i, j), c, ctx.t_outer);
                }
                out_delta(i, j) = take ? ctx.proposed_delta(i, j) : ctx.current_delta(i, j);
                if (take) ++accepted;
            }
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                const double u = counter_uniform(seed, ctx.t_outer, ctx.t_inner, i, j, 1);
                const bool take = u < accept_probability(posterior(i, j), c, ctx.t_outer);
                const double v = take ? ctx.proposed_beta(i, j) : ctx.current_beta(i, j);
                out_beta(i, j) = v;
                out_beta(j, i) = v;
                if (take) ++accepted;
            }
        return accepted;
    };
}

FitResult spot_fit_cov(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& posterior,
                       const SpotConfig& cfg, const Eigen::MatrixXi* skeleton) {
    if (posterior.rows() != cov.rows())
        throw std::invalid_argument("spot_fit_cov: posterior/covariance dimension mismatch");
    return abic_fit_cov(cov, cfg.abic, make_guide(posterior, cfg), skeleton);
}

FitResult spot_fit(const Dataset& data, const Eigen::MatrixXd& posterior, const SpotConfig& cfg,
                   const Eigen::MatrixXi* skeleton) {
    validate(data);
    return spot_fit_cov(covariance_matrix(data.X), posterior, cfg, skeleton);
}

}  // namespace spotcd
