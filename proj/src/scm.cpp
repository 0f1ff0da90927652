#include "spotcd/scm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spotcd/parallel.hpp"

namespace spotcd {

ScmParams ScmParams::zero(int d) {
    ScmParams p;
    p.d = d;
    p.delta = Eigen::MatrixXd::Zero(d, d);
    p.beta = Eigen::MatrixXd::Zero(d, d);
    return p;
}

void validate(const Dataset& data) {
    if (data.X.rows() < 1 || data.X.cols() < 1)
        throw std::invalid_argument("Dataset: needs at least one row and column");
    if (!data.X.allFinite()) throw std::invalid_argument("Dataset: non-finite values");
    if (!data.names.empty() && static_cast<int>(data.names.size()) != data.d())
        throw std::invalid_argument("Dataset: name count mismatch");
}

std::vector<std::string> default_names(int d) {
    std::vector<std::string> names;
    names.reserve(d);
    for (int i = 0; i < d; ++i) names.push_back("V" + std::to_string(i));
    return names;
}

namespace {

int edge_budget(int d, const std::pair<double, double>& indegree_range) {
    double mean_indeg = 0.5 * (indegree_range.first + indegree_range.second);
    long max_pairs = static_cast<long>(d) * (d - 1) / 2;
    long e = std::lround(d * mean_indeg);
    return static_cast<int>(std::min<long>(e, max_pairs));
}

int bidirected_count(int total, const std::pair<double, double>& frac_range, Rng& rng) {
    if (total == 0) return 0;
    double frac = rng.uniform(frac_range.first, frac_range.second);
    long n_bi = std::lround(total * frac);
    // Keep the measured fraction inside the range whenever an integer fits.
    long lo = static_cast<long>(std::ceil(total * frac_range.first - 1e-9));
    long hi = static_cast<long>(std::floor(total * frac_range.second + 1e-9));
    if (lo <= hi) n_bi = std::clamp(n_bi, lo, hi);
    return static_cast<int>(std::clamp<long>(n_bi, 0, total));
}

void add_bidirected(Admg& g, const std::vector<std::pair<int, int>>& candidates, int want) {
    Eigen::MatrixXi reach = ancestor_closure(g);
    int added = 0;
    for (const auto& [u, v] : candidates) {
        if (added == want) break;
        if (g.adjacent(u, v)) continue;
        if (reach(u, v) || reach(v, u)) continue;
        g.B(u, v) = g.B(v, u) = 1;
        ++added;
    }
}

Admg sample_er(const GraphSamplerConfig& cfg, Rng& rng) {
    int d = cfg.d;
    Admg g = Admg::empty(d);
    int total = edge_budget(d, cfg.indegree_range);
    int n_bi = bidirected_count(total, cfg.bidirected_fraction_range, rng);
    int n_dir = total - n_bi;

    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<int> pos(d);
    for (int i = 0; i < d; ++i) pos[order[i]] = i;

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<size_t>(d) * (d - 1) / 2);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
    rng.shuffle(pairs);

    for (int k = 0; k < n_dir; ++k) {
        auto [u, v] = pairs[k];
        if (pos[u] < pos[v]) g.D(u, v) = 1;
        else g.D(v, u) = 1;
    }
    std::vector<std::pair<int, int>> rest(pairs.begin() + n_dir, pairs.end());
    add_bidirected(g, rest, n_bi);
    return g;
}

Admg sample_sf(const GraphSamplerConfig& cfg, Rng& rng) {
    int d = cfg.d;
    Admg g = Admg::empty(d);
    int total = edge_budget(d, cfg.indegree_range);
    int n_bi = bidirected_count(total, cfg.bidirected_fraction_range, rng);
    int n_dir = total - n_bi;

    // Preferential attachment in arrival order 0..d-1, relabeled afterwards.
    std::vector<int> parents_of(d, 0);
    int assigned = 0;
    for (int k = 1; k < d && assigned < n_dir; ++k) {
        int share = (n_dir - assigned) / (d - k);
        share = std::max(1, share);
        parents_of[k] = std::min({share, k, n_dir - assigned});
        assigned += parents_of[k];
    }
    std::vector<int> degree(d, 0);
    Eigen::MatrixXi arrival_D = Eigen::MatrixXi::Zero(d, d);
    for (int k = 1; k < d; ++k) {
        for (int m = 0; m < parents_of[k]; ++m) {
            long weight_sum = 0;
            for (int u = 0; u < k; ++u)
                if (!arrival_D(u, k)) weight_sum += degree[u] + 1;
            if (weight_sum == 0) break;
            double r = rng.uniform() * static_cast<double>(weight_sum);
            long acc = 0;
            int chosen = -1;
            for (int u = 0; u < k; ++u) {
                if (arrival_D(u, k)) continue;
                acc += degree[u] + 1;
                if (r < static_cast<double>(acc)) {
                    chosen = u;
                    break;
                }
            }
            if (chosen < 0) chosen = k - 1;
            arrival_D(chosen, k) = 1;
            ++degree[chosen];
            ++degree[k];
        }
    }
    std::vector<int> label(d);
    for (int i = 0; i < d; ++i) label[i] = i;
    rng.shuffle(label);
    for (int u = 0; u < d; ++u)
        for (int v = 0; v < d; ++v)
            if (arrival_D(u, v)) g.D(label[u], label[v]) = 1;

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (!g.adjacent(i, j)) pairs.emplace_back(i, j);
    rng.shuffle(pairs);
    add_bidirected(g, pairs, n_bi);
    return g;
}

}  // namespace

Admg sample_admg(const GraphSamplerConfig& cfg, Rng& rng) {
    if (cfg.d < 1) throw std::invalid_argument("sample_admg: d must be >= 1");
    Admg g = cfg.topology == Topology::Er ? sample_er(cfg, rng) : sample_sf(cfg, rng);
    return g;
}

ScmParams parameterize_scm(const Admg& g, const WeightRanges& ranges, Rng& rng) {
    validate(g);
    ScmParams p = ScmParams::zero(g.d);
    for (int i = 0; i < g.d; ++i)
        for (int j = 0; j < g.d; ++j)
            if (g.D(i, j)) {
                double mag = rng.uniform(ranges.delta_mag.first, ranges.delta_mag.second);
                p.delta(i, j) = rng.coin() ? mag : -mag;
            }
    for (int i = 0; i < g.d; ++i)
        for (int j = i + 1; j < g.d; ++j)
            if (g.B(i, j)) {
                double mag =
                    rng.uniform(ranges.beta_offdiag_mag.first, ranges.beta_offdiag_mag.second);
                double w = rng.coin() ? mag : -mag;
                p.beta(i, j) = p.beta(j, i) = w;
            }
    for (int i = 0; i < g.d; ++i) {
        double base = rng.uniform(ranges.beta_diag_base.first, ranges.beta_diag_base.second);
        p.beta(i, i) = std::abs(base) + p.beta.row(i).cwiseAbs().sum() - std::abs(p.beta(i, i));
    }
    return p;
}

Eigen::MatrixXd implied_covariance(const ScmParams& params) {
    int d = params.d;
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(d, d) - params.delta;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) throw std::runtime_error("implied_covariance: I - delta is singular");
    Eigen::MatrixXd Kinv = lu.inverse();
    return Kinv.transpose() * params.beta * Kinv;
}

Dataset sample_dataset(const ScmParams& params, int n, Rng& rng, SamplePath path) {
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
    int d = params.d;
    Dataset out;
    out.names = default_names(d);
    out.X.resize(n, d);
    if (path == SamplePath::Structural) {
        Eigen::LLT<Eigen::MatrixXd> llt(params.beta);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("sample_dataset: beta is not positive definite");
        Eigen::MatrixXd L = llt.matrixL();
        Eigen::MatrixXd K = Eigen::MatrixXd::Identity(d, d) - params.delta;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
        if (!lu.isInvertible()) throw std::runtime_error("sample_dataset: I - delta is singular");
        Eigen::MatrixXd Kinv = lu.inverse();
        Eigen::VectorXd z(d);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < d; ++c) z(c) = rng.normal();
            out.X.row(r) = (L * z).transpose() * Kinv;
        }
    } else {
        Eigen::MatrixXd sigma = implied_covariance(params);
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("sample_dataset: implied covariance not positive definite");
        Eigen::MatrixXd L = llt.matrixL();
        Eigen::VectorXd z(d);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < d; ++c) z(c) = rng.normal();
            out.X.row(r) = (L * z).transpose();
        }
    }
    return out;
}

std::vector<CorpusItem> generate_corpus(const CorpusConfig& cfg) {
    if (cfg.count < 0) throw std::invalid_argument("generate_corpus: negative count");
    std::vector<CorpusItem> items(cfg.count);
    parallel_for(cfg.count, [&](std::int64_t i) {
        Rng rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(i));
        CorpusItem& item = items[i];
        item.seed = mix_two(cfg.seed, static_cast<std::uint64_t>(i));
        GraphSamplerConfig g = cfg.graph;
        g.d = cfg.d_range.first == cfg.d_range.second
                  ? cfg.d_range.first
                  : rng.uniform_int(cfg.d_range.first, cfg.d_range.second);
        item.graph = sample_admg(g, rng);
        item.params = parameterize_scm(item.graph, cfg.ranges, rng);
        item.data = sample_dataset(item.params, cfg.n, rng);
    });
    return items;
}

}  // namespace spotcd
