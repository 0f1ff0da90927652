#include "spotcd/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spotcd/parallel.hpp"

namespace spotcd {

namespace {

double sigmoid(double m) {
    m = std::clamp(m, -36.0, 36.0);
    return 1.0 / (1.0 + std::exp(-m));
}

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;

    bool better_than(const SplitChoice& o) const {
        if (gain != o.gain) return gain > o.gain;
        if (feature != o.feature) return feature < o.feature;
        return threshold < o.threshold;
    }
};

struct ScanState {
    double gl = 0.0, hl = 0.0;
    int cnt = 0;
    double prev = 0.0;
    bool has_prev = false;
};

}  // namespace

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int cur = 0;
    while (nodes[cur].feature >= 0)
        cur = x(nodes[cur].feature) <= nodes[cur].threshold ? nodes[cur].left : nodes[cur].right;
    return nodes[cur].value;
}

double GbdtModel::predict_margin(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double m = base_score;
    for (const Tree& t : trees) m += t.predict(x);
    return m;
}

double GbdtModel::predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return sigmoid(predict_margin(x));
}

Eigen::VectorXd GbdtModel::predict_proba_rows(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    parallel_for(X.rows(), [&](std::ptrdiff_t r) { out(r) = predict_proba(X.row(r)); });
    return out;
}

GbdtModel gbdt_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const GbdtConfig& cfg) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (n < 1 || p < 1) throw std::invalid_argument("gbdt_train: empty training set");
    if (y.size() != n) throw std::invalid_argument("gbdt_train: label length mismatch");
    for (int r = 0; r < n; ++r)
        if (!(y(r) >= 0.0 && y(r) <= 1.0))
            throw std::invalid_argument("gbdt_train: labels must lie in [0, 1]");

    GbdtModel model;
    model.cfg = cfg;
    model.n_features = p;
    const double p_bar = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(p_bar / (1.0 - p_bar));

    // Global presort, shared by every tree.
    std::vector<std::vector<int>> order(p, std::vector<int>(n));
    parallel_for(p, [&](std::ptrdiff_t f) {
        std::iota(order[f].begin(), order[f].end(), 0);
        std::stable_sort(order[f].begin(), order[f].end(),
                         [&](int a, int b) { return X(a, f) < X(b, f); });
    });

    Eigen::VectorXd margin = Eigen::VectorXd::Constant(n, model.base_score);
    Eigen::VectorXd g(n), h(n);
    std::vector<int> node_of(n);

    for (int t = 0; t < cfg.n_trees; ++t) {
        for (int r = 0; r < n; ++r) {
            const double pr = sigmoid(margin(r));
            g(r) = pr - y(r);
            h(r) = std::max(pr * (1.0 - pr), 1e-16);
        }

        Tree tree;
        tree.nodes.push_back(TreeNode{});
        std::fill(node_of.begin(), node_of.end(), 0);
        std::vector<int> level = {0};

        for (int depth = 0; depth < cfg.max_depth && !level.empty(); ++depth) {
            const int ns = static_cast<int>(level.size());
            std::vector<int> slot_of(tree.nodes.size(), -1);
            for (int s = 0; s < ns; ++s) slot_of[level[s]] = s;

            std::vector<double> gt(ns, 0.0), ht(ns, 0.0);
            std::vector<int> cnt_tot(ns, 0);
            for (int r = 0; r < n; ++r) {
                const int s = slot_of[node_of[r]];
                if (s < 0) continue;
                gt[s] += g(r);
                ht[s] += h(r);
                ++cnt_tot[s];
            }

            // Per-feature pass over the presorted order; each feature fills
            // its own candidate table, reduced serially afterwards.
            std::vector<std::vector<SplitChoice>> cand(p, std::vector<SplitChoice>(ns));
            parallel_for(p, [&](std::ptrdiff_t f) {
                std::vector<ScanState> st(ns);
                for (int k = 0; k < n; ++k) {
                    const int r = order[f][k];
                    const int s = slot_of[node_of[r]];
                    if (s < 0) continue;
                    const double v = X(r, f);
                    ScanState& sc = st[s];
                    if (sc.has_prev && v > sc.prev && sc.cnt >= cfg.min_leaf &&
                        cnt_tot[s] - sc.cnt >= cfg.min_leaf) {
                        const double gr = gt[s] - sc.gl;
                        const double hr = ht[s] - sc.hl;
                        const double gain = sc.gl * sc.gl / (sc.hl + cfg.reg_lambda) +
                                            gr * gr / (hr + cfg.reg_lambda) -
                                            gt[s] * gt[s] / (ht[s] + cfg.reg_lambda);
                        SplitChoice ch{gain, static_cast<int>(f), 0.5 * (sc.prev + v)};
                        if (gain > 1e-12 && ch.better_than(cand[f][s])) cand[f][s] = ch;
                    }
                    sc.gl += g(r);
                    sc.hl += h(r);
                    ++sc.cnt;
                    sc.prev = v;
                    sc.has_prev = true;
                }
            });

            std::vector<SplitChoice> best(ns);
            for (int f = 0; f < p; ++f)
                for (int s = 0; s < ns; ++s)
                    if (cand[f][s].feature >= 0 && cand[f][s].better_than(best[s]))
                        best[s] = cand[f][s];

            std::vector<int> next_level;
            for (int s = 0; s < ns; ++s) {
                if (best[s].feature < 0) continue;
                TreeNode& nd = tree.nodes[level[s]];
                nd.feature = best[s].feature;
                nd.threshold = best[s].threshold;
                nd.left = static_cast<int>(tree.nodes.size());
                nd.right = nd.left + 1;
                tree.nodes.push_back(TreeNode{});
                tree.nodes.push_back(TreeNode{});
                next_level.push_back(nd.left);
                next_level.push_back(nd.right);
            }
            if (next_level.empty()) break;
            for (int r = 0; r < n; ++r) {
                const TreeNode& nd = tree.nodes[node_of[r]];
                if (nd.feature >= 0)
                    node_of[r] = X(r, nd.feature) <= nd.threshold ? nd.left : nd.right;
            }
            level = std::move(next_level);
        }

        // Leaf weights from the final row assignment.
        std::vector<double> gl(tree.nodes.size(), 0.0), hl(tree.nodes.size(), 0.0);
        for (int r = 0; r < n; ++r) {
            gl[node_of[r]] += g(r);
            hl[node_of[r]] += h(r);
        }
        for (size_t i = 0; i < tree.nodes.size(); ++i)
            if (tree.nodes[i].feature < 0)
                tree.nodes[i].value =
                    -gl[i] / (hl[i] + cfg.reg_lambda) * cfg.learning_rate;

        for (int r = 0; r < n; ++r) margin(r) += tree.nodes[node_of[r]].value;
        model.trees.push_back(std::move(tree));
    }
    return model;
}

double IsotonicModel::apply(double v) const {
    double out;
    if (x.empty())
        out = 0.5;
    else if (v <= x.front())
        out = y.front();
    else if (v >= x.back())
        out = y.back();
    else {
        const auto it = std::upper_bound(x.begin(), x.end(), v);
        const size_t k = static_cast<size_t>(it - x.begin());
        const double t = (v - x[k - 1]) / (x[k] - x[k - 1]);
        out = y[k - 1] + t * (y[k] - y[k - 1]);
    }
    return std::clamp(out, 1e-3, 1.0 - 1e-3);
}

IsotonicModel isotonic_fit(const std::vector<double>& scores,
                           const std::vector<double>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("isotonic_fit: need matching nonempty inputs");
    const size_t n = scores.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return scores[a] < scores[b]; });

    struct Block {
        double sx, sy, w;
    };
    std::vector<Block> blocks;
    blocks.reserve(n);
    for (int i : idx) {
        blocks.push_back({scores[i], labels[i], 1.0});
        while (blocks.size() >= 2) {
            Block& b = blocks[blocks.size() - 1];
            Block& a = blocks[blocks.size() - 2];
            if (a.sy / a.w <= b.sy / b.w) break;
            a.sx += b.sx;
            a.sy += b.sy;
            a.w += b.w;
            blocks.pop_back();
        }
    }
    IsotonicModel m;
    for (const Block& b : blocks) {
        const double cx = b.sx / b.w;
        const double cy = b.sy / b.w;
        if (!m.x.empty() && cx <= m.x.back()) {
            // Identical centers collapse into one knot (keep the later mean).
            m.y.back() = cy;
            continue;
        }
        m.x.push_back(cx);
        m.y.push_back(cy);
    }
    return m;
}

}  // namespace spotcd
