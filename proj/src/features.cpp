#include "spotcd/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spotcd/citest.hpp"
#include "spotcd/parallel.hpp"

namespace spotcd {

int stage_cond_cap(int stage) { return stage + 1; }

int feature_length(int stage) {
    const int base = stage == 0 ? 7 : 8;
    return base + 6 * stage_cond_cap(stage);
}

std::vector<std::vector<int>> candidate_neighbors(const Eigen::MatrixXd& score,
                                                  const std::vector<std::string>& names,
                                                  double min_score, int top_m) {
    const int d = static_cast<int>(score.rows());
    if (static_cast<int>(names.size()) != d)
        throw std::invalid_argument("candidate_neighbors: names/score size mismatch");
    std::vector<std::vector<int>> out(d);
    for (int v = 0; v < d; ++v) {
        std::vector<int> cand;
        for (int u = 0; u < d; ++u)
            if (u != v && score(v, u) >= min_score) cand.push_back(u);
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            if (score(v, a) != score(v, b)) return score(v, a) > score(v, b);
            return names[a] < names[b];
        });
        if (static_cast<int>(cand.size()) > top_m) cand.resize(top_m);
        out[v] = std::move(cand);
    }
    return out;
}

std::vector<std::pair<int, int>> all_pairs(int d) {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<size_t>(d) * (d - 1) / 2);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) out.push_back({i, j});
    return out;
}

namespace {

// First `cap` k-subsets of pool in lexicographic rank order.
void collect_pvalues(const Eigen::MatrixXd& cov, int n, int i, int j,
                     const std::vector<int>& pool, int k, int cap,
                     std::vector<double>& out) {
    const int m = static_cast<int>(pool.size());
    if (k > m) return;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<int> z(k);
    int emitted = 0;
    while (emitted < cap) {
        for (int t = 0; t < k; ++t) z[t] = pool[idx[t]];
        double p = 1.0;
        if (n > k + 3) {
            try {
                p = fisher_z(cov, n, i, j, z).p_value;
            } catch (const std::exception&) {
                p = 1.0;
            }
        }
        out.push_back(p);
        ++emitted;
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == m - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int t = pos + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
    }
}

double quantile(const std::vector<double>& sorted, double q) {
    const int m = static_cast<int>(sorted.size());
    const double pos = q * (m - 1);
    const int lo = static_cast<int>(std::floor(pos));
    if (lo >= m - 1) return sorted.back();
    const double frac = pos - lo;
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

void aggregate_block(std::vector<double> pvals, double* out) {
    if (pvals.empty()) {
        std::fill(out, out + 6, 1.0);
        return;
    }
    std::sort(pvals.begin(), pvals.end());
    const double mean =
        std::accumulate(pvals.begin(), pvals.end(), 0.0) / static_cast<double>(pvals.size());
    out[0] = pvals.front();
    out[1] = quantile(pvals, 0.25);
    out[2] = quantile(pvals, 0.5);
    out[3] = quantile(pvals, 0.75);
    out[4] = pvals.back();
    out[5] = mean;
}

}  // namespace

StageFeatures extract_pair_features(const Eigen::MatrixXd& cov, int n,
                                    const std::vector<std::string>& names, int stage,
                                    const Eigen::MatrixXd* prev_scores,
                                    const std::vector<std::pair<int, int>>& active,
                                    const FeatureConfig& cfg) {
    const int d = static_cast<int>(cov.rows());
    if (stage < 0) throw std::invalid_argument("extract_pair_features: negative stage");
    if ((stage == 0) != (prev_scores == nullptr))
        throw std::invalid_argument(
            "extract_pair_features: prev_scores must be given exactly when stage >= 1");
    if (prev_scores && (prev_scores->rows() != d || prev_scores->cols() != d))
        throw std::invalid_argument("extract_pair_features: prev_scores dimension mismatch");

    StageFeatures sf;
    sf.pairs = active;

    std::vector<char> degen(d, 0);
    for (int i = 0; i < d; ++i)
        if (cov(i, i) <= 1e-12) {
            degen[i] = 1;
            sf.degenerate.push_back(i);
        }
    Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j || degen[i] || degen[j]) continue;
            corr(i, j) = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
        }

    const Eigen::MatrixXd rank_score = prev_scores ? *prev_scores : corr.cwiseAbs();
    const double min_score = prev_scores ? cfg.prune_threshold : -1.0;
    const std::vector<std::vector<int>> nbrs =
        candidate_neighbors(rank_score, names, min_score, cfg.top_m);

    const int cap = stage_cond_cap(stage);
    const int len = feature_length(stage);
    sf.X.resize(static_cast<Eigen::Index>(active.size()), len);

    parallel_for(static_cast<std::ptrdiff_t>(active.size()), [&](std::ptrdiff_t row) {
        const auto [i, j] = active[row];
        std::vector<double> buf(static_cast<size_t>(len));
        double* f = buf.data();
        const double r = corr(i, j);
        double p0 = 1.0;
        if (!degen[i] && !degen[j] && n > 3) {
            try {
                p0 = fisher_z(cov, n, i, j, {}).p_value;
            } catch (const std::exception&) {
                p0 = 1.0;
            }
        }
        std::vector<int> pool_i, pool_j;
        for (int u : nbrs[i])
            if (u != j) pool_i.push_back(u);
        for (int u : nbrs[j])
            if (u != i) pool_j.push_back(u);
        int overlap = 0;
        for (int u : pool_i)
            if (std::find(pool_j.begin(), pool_j.end(), u) != pool_j.end()) ++overlap;
        const double ni = static_cast<double>(pool_i.size());
        const double nj = static_cast<double>(pool_j.size());

        int t = 0;
        f[t++] = r;
        f[t++] = std::abs(r);
        f[t++] = p0;
        f[t++] = static_cast<double>(d);
        f[t++] = std::min(ni, nj);
        f[t++] = std::max(ni, nj);
        f[t++] = static_cast<double>(overlap);
        if (stage >= 1) f[t++] = (*prev_scores)(i, j);

        for (int k = 1; k <= cap; ++k) {
            std::vector<double> pvals;
            if (!degen[i] && !degen[j]) {
                collect_pvalues(cov, n, i, j, pool_i, k, cfg.max_subsets_per_side, pvals);
                collect_pvalues(cov, n, i, j, pool_j, k, cfg.max_subsets_per_side, pvals);
            }
            aggregate_block(std::move(pvals), f + t);
            t += 6;
        }
        for (int c = 0; c < len; ++c) sf.X(row, c) = buf[static_cast<size_t>(c)];
    });
    return sf;
}

StageFeatures extract_pair_features(const Dataset& data, int stage,
                                    const Eigen::MatrixXd* prev_scores,
                                    const FeatureConfig& cfg) {
    validate(data);
    Eigen::MatrixXd cov = covariance_matrix(data.X);
    return extract_pair_features(cov, data.n(), data.names, stage, prev_scores,
                                 all_pairs(data.d()), cfg);
}

}  // namespace spotcd
