#include "spotcd/fci.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace spotcd {

CiFunction gaussian_ci(CiCache cache) {
    return [cache = std::move(cache)](int i, int j, const std::vector<int>& z) {
        return fisher_z(cache.cov, cache.n, i, j, z);
    };
}

CiFunction oracle_ci(Admg g) {
    return [g = std::move(g)](int i, int j, const std::vector<int>& z) {
        CiResult r;
        const bool sep = m_separated(g, i, j, z);
        r.p_value = sep ? 1.0 : 0.0;
        r.statistic = sep ? 0.0 : std::numeric_limits<double>::infinity();
        r.partial_corr = sep ? 0.0 : 1.0;
        return r;
    };
}

namespace {

std::pair<int, int> ordered(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

// Lexicographic k-subsets of pool (pool already sorted ascending). Calls
// visit(subset); stops early when visit returns true.
bool for_each_subset(const std::vector<int>& pool, int k,
                     const std::function<bool(const std::vector<int>&)>& visit) {
    const int n = static_cast<int>(pool.size());
    if (k > n) return false;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    std::vector<int> subset(k);
    while (true) {
        for (int i = 0; i < k; ++i) subset[i] = pool[idx[i]];
        if (visit(subset)) return true;
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == n - k + pos) --pos;
        if (pos < 0) return false;
        ++idx[pos];
        for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
}

std::vector<int> adjacent_nodes(const Eigen::MatrixXi& adj, int i, int skip) {
    std::vector<int> out;
    for (int k = 0; k < adj.rows(); ++k)
        if (k != i && k != skip && adj(i, k)) out.push_back(k);
    return out;
}

struct Skeleton {
    Eigen::MatrixXi adj;
    SepsetMap sepsets;
};

void learn_skeleton(Skeleton& sk, int d, const CiFunction& ci, const FciConfig& cfg,
                    long& tests, Eigen::MatrixXd* max_p = nullptr) {
    for (int depth = 0; depth <= cfg.max_cond_size; ++depth) {
        const Eigen::MatrixXi frozen = sk.adj;
        int max_free = 0;
        for (int i = 0; i < d; ++i) max_free = std::max(max_free, (int)frozen.row(i).sum() - 1);
        if (depth > max_free) break;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                if (!sk.adj(i, j)) continue;
                bool removed = false;
                for (int side = 0; side < 2 && !removed; ++side) {
                    const int a = side == 0 ? i : j;
                    const int b = side == 0 ? j : i;
                    std::vector<int> pool = adjacent_nodes(frozen, a, b);
                    removed = for_each_subset(pool, depth, [&](const std::vector<int>& z) {
                        ++tests;
                        const double p = ci(i, j, z).p_value;
                        if (max_p && p > (*max_p)(i, j)) (*max_p)(i, j) = (*max_p)(j, i) = p;
                        if (p > cfg.alpha) {
                            sk.adj(i, j) = sk.adj(j, i) = 0;
                            sk.sepsets[ordered(i, j)] = z;
                            return true;
                        }
                        return false;
                    });
                }
            }
        }
    }
}

void orient_colliders(Pag& p, const Eigen::MatrixXi& adj, const SepsetMap& sepsets) {
    const int d = p.d;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i) {
            if (i == k || !adj(i, k)) continue;
            for (int j = i + 1; j < d; ++j) {
                if (j == k || !adj(j, k) || adj(i, j)) continue;
                auto it = sepsets.find(ordered(i, j));
                const std::vector<int>& z = it == sepsets.end() ? std::vector<int>{} : it->second;
                if (std::find(z.begin(), z.end(), k) == z.end()) {
                    p.set_mark(i, k, Mark::Arrow);
                    p.set_mark(j, k, Mark::Arrow);
                }
            }
        }
}

Pag circles_from_adjacency(const Eigen::MatrixXi& adj) {
    const int d = static_cast<int>(adj.rows());
    Pag p = Pag::empty(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (adj(i, j)) p.add_edge(i, j, Mark::Circle, Mark::Circle);
    return p;
}

// Possible-d-sep set of x: nodes reachable along paths whose internal triples
// are colliders or triangles in the partially oriented graph.
std::vector<int> possible_dsep_set(const Pag& p, int x) {
    const int d = p.d;
    std::vector<std::vector<char>> seen(d, std::vector<char>(d, 0));
    std::vector<char> member(d, 0);
    std::queue<std::pair<int, int>> q;
    for (int n = 0; n < d; ++n)
        if (p.adjacent(x, n)) {
            q.push({x, n});
            seen[x][n] = 1;
            member[n] = 1;
        }
    while (!q.empty()) {
        auto [a, b] = q.front();
        q.pop();
        for (int c = 0; c < d; ++c) {
            if (c == a || c == b || !p.adjacent(b, c)) continue;
            const bool collider = p.mark(a, b) == Mark::Arrow && p.mark(c, b) == Mark::Arrow;
            const bool triangle = p.adjacent(a, c);
            if (!collider && !triangle) continue;
            if (seen[b][c]) continue;
            seen[b][c] = 1;
            member[c] = 1;
            q.push({b, c});
        }
    }
    std::vector<int> out;
    for (int n = 0; n < d; ++n)
        if (n != x && member[n]) out.push_back(n);
    return out;
}

void possible_dsep_stage(Skeleton& sk, const CiFunction& ci, const FciConfig& cfg,
                         long& tests) {
    const int d = static_cast<int>(sk.adj.rows());
    Pag partial = circles_from_adjacency(sk.adj);
    orient_colliders(partial, sk.adj, sk.sepsets);
    std::vector<std::vector<int>> pds(d);
    for (int i = 0; i < d; ++i) pds[i] = possible_dsep_set(partial, i);

    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (!sk.adj(i, j)) continue;
            bool removed = false;
            for (int side = 0; side < 2 && !removed; ++side) {
                const int a = side == 0 ? i : j;
                const int b = side == 0 ? j : i;
                std::vector<int> pool;
                for (int n : pds[a])
                    if (n != b) pool.push_back(n);
                for (int depth = 1; depth <= cfg.max_cond_size && !removed; ++depth) {
                    removed = for_each_subset(pool, depth, [&](const std::vector<int>& z) {
                        ++tests;
                        if (ci(i, j, z).p_value > cfg.alpha) {
                            sk.adj(i, j) = sk.adj(j, i) = 0;
                            sk.sepsets[ordered(i, j)] = z;
                            return true;
                        }
                        return false;
                    });
                }
            }
        }
    }
}

}  // namespace

FciResult fci_learn_ci(int d, const CiFunction& ci, const FciConfig& cfg) {
    if (d < 1) throw std::invalid_argument("fci_learn_ci: d must be positive");
    FciResult res;
    Skeleton sk;
    sk.adj = Eigen::MatrixXi::Ones(d, d);
    sk.adj.diagonal().setZero();
    learn_skeleton(sk, d, ci, cfg, res.ci_tests);
    if (cfg.possible_dsep) possible_dsep_stage(sk, ci, cfg, res.ci_tests);

    Pag p = circles_from_adjacency(sk.adj);
    orient_colliders(p, sk.adj, sk.sepsets);
    const SepsetMap& sepsets = sk.sepsets;
    R4Decider decider = [&sepsets](int theta, int, int beta, int gamma) {
        auto it = sepsets.find(ordered(theta, gamma));
        if (it == sepsets.end()) return false;
        return std::find(it->second.begin(), it->second.end(), beta) != it->second.end();
    };
    apply_orientation_rules(p, decider);

    res.pag = p;
    res.mag = pag_to_mag(p);
    res.sepsets = sk.sepsets;
    return res;
}

FciResult fci_learn(const Dataset& data, const FciConfig& cfg) {
    validate(data);
    CiCache cache = make_ci_cache(data);
    return fci_learn_ci(data.d(), gaussian_ci(std::move(cache)), cfg);
}

SkeletonEvidence fci_skeleton_with_pvalues(const Dataset& data, const FciConfig& cfg) {
    validate(data);
    const int d = data.d();
    CiCache cache = make_ci_cache(data);
    CiFunction ci = gaussian_ci(std::move(cache));
    Skeleton sk;
    sk.adj = Eigen::MatrixXi::Ones(d, d);
    sk.adj.diagonal().setZero();
    SkeletonEvidence ev;
    ev.max_p = Eigen::MatrixXd::Zero(d, d);
    long tests = 0;
    learn_skeleton(sk, d, ci, cfg, tests, &ev.max_p);
    ev.adj = sk.adj;
    return ev;
}

}  // namespace spotcd
