#include "spotcd/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace spotcd {

Admg Admg::empty(int d) {
    if (d < 1) throw std::invalid_argument("Admg: d must be >= 1");
    Admg g;
    g.d = d;
    g.D = Eigen::MatrixXi::Zero(d, d);
    g.B = Eigen::MatrixXi::Zero(d, d);
    return g;
}

int Admg::edge_count() const {
    int n = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (D(i, j)) ++n;
            if (j > i && B(i, j)) ++n;
        }
    return n;
}

void validate(const Admg& g) {
    if (g.d < 1) throw std::invalid_argument("Admg: d must be >= 1");
    if (g.D.rows() != g.d || g.D.cols() != g.d || g.B.rows() != g.d || g.B.cols() != g.d)
        throw std::invalid_argument("Admg: matrix shape mismatch");
    for (int i = 0; i < g.d; ++i) {
        if (g.D(i, i) != 0 || g.B(i, i) != 0)
            throw std::invalid_argument("Admg: diagonal must be zero");
        for (int j = 0; j < g.d; ++j) {
            if ((g.D(i, j) != 0 && g.D(i, j) != 1) || (g.B(i, j) != 0 && g.B(i, j) != 1))
                throw std::invalid_argument("Admg: entries must be 0/1");
            if (g.B(i, j) != g.B(j, i))
                throw std::invalid_argument("Admg: B must be symmetric");
        }
    }
}

Eigen::MatrixXi skeleton_of(const Admg& g) {
    Eigen::MatrixXi s = Eigen::MatrixXi::Zero(g.d, g.d);
    for (int i = 0; i < g.d; ++i)
        for (int j = 0; j < g.d; ++j)
            if (i != j && g.adjacent(i, j)) s(i, j) = 1;
    return s;
}

bool has_directed_cycle(const Admg& g) {
    // Kahn's algorithm.
    std::vector<int> indeg(g.d, 0);
    for (int i = 0; i < g.d; ++i)
        for (int j = 0; j < g.d; ++j)
            if (g.D(i, j)) ++indeg[j];
    std::deque<int> q;
    for (int i = 0; i < g.d; ++i)
        if (indeg[i] == 0) q.push_back(i);
    int seen = 0;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        ++seen;
        for (int j = 0; j < g.d; ++j)
            if (g.D(v, j) && --indeg[j] == 0) q.push_back(j);
    }
    return seen != g.d;
}

Eigen::MatrixXi ancestor_closure(const Admg& g) {
    Eigen::MatrixXi r = g.D;
    // Floyd-Warshall style transitive closure; d stays small enough.
    for (int k = 0; k < g.d; ++k)
        for (int i = 0; i < g.d; ++i) {
            if (!r(i, k)) continue;
            for (int j = 0; j < g.d; ++j)
                if (r(k, j)) r(i, j) = 1;
        }
    return r;
}

std::vector<int> ancestors(const Admg& g, int i) {
    if (i < 0 || i >= g.d) throw std::invalid_argument("ancestors: node out of range");
    Eigen::MatrixXi r = ancestor_closure(g);
    std::vector<int> out;
    for (int a = 0; a < g.d; ++a)
        if (a == i || r(a, i)) out.push_back(a);
    return out;
}

bool is_ancestral(const Admg& g) {
    validate(g);
    if (has_directed_cycle(g)) return false;
    Eigen::MatrixXi r = ancestor_closure(g);
    for (int i = 0; i < g.d; ++i)
        for (int j = i + 1; j < g.d; ++j)
            if (g.B(i, j) && (r(i, j) || r(j, i))) return false;
    return true;
}

bool is_bow_free(const Admg& g) {
    validate(g);
    for (int i = 0; i < g.d; ++i)
        for (int j = 0; j < g.d; ++j)
            if (g.D(i, j) && g.B(i, j)) return false;
    return true;
}

namespace {

// Edge marks at the two endpoints of one traversable edge.
struct HalfEdge {
    int to;
    bool arrow_at_from;
    bool arrow_at_to;
};

std::vector<std::vector<HalfEdge>> build_half_edges(const Admg& g) {
    std::vector<std::vector<HalfEdge>> adj(g.d);
    for (int i = 0; i < g.d; ++i)
        for (int j = 0; j < g.d; ++j) {
            if (i == j) continue;
            if (g.D(i, j)) {
                adj[i].push_back({j, false, true});
                adj[j].push_back({i, true, false});
            }
            if (j > i && g.B(i, j)) {
                adj[i].push_back({j, true, true});
                adj[j].push_back({i, true, true});
            }
        }
    return adj;
}

}  // namespace

bool m_separated(const Admg& g, int x, int y, const std::vector<int>& z) {
    validate(g);
    if (x == y || x < 0 || y < 0 || x >= g.d || y >= g.d)
        throw std::invalid_argument("m_separated: bad endpoints");
    std::vector<char> in_z(g.d, 0);
    for (int v : z) {
        if (v < 0 || v >= g.d) throw std::invalid_argument("m_separated: z out of range");
        if (v == x || v == y) throw std::invalid_argument("m_separated: endpoint in z");
        in_z[v] = 1;
    }

    // Ancestor set of z, including z itself.
    Eigen::MatrixXi r = ancestor_closure(g);
    std::vector<char> an_z(g.d, 0);
    for (int v = 0; v < g.d; ++v) {
        if (in_z[v]) an_z[v] = 1;
        else
            for (int w = 0; w < g.d; ++w)
                if (in_z[w] && r(v, w)) {
                    an_z[v] = 1;
                    break;
                }
    }

    auto adj = build_half_edges(g);

    // Reachability over walk states (node, arrived-with-arrowhead); a walk
    // m-connects iff a path does.
    std::vector<char> visited(static_cast<size_t>(g.d) * 2, 0);
    std::deque<std::pair<int, bool>> q;
    for (const auto& e : adj[x]) {
        if (e.to == y) return false;
        size_t key = static_cast<size_t>(e.to) * 2 + (e.arrow_at_to ? 1 : 0);
        if (!visited[key]) {
            visited[key] = 1;
            q.emplace_back(e.to, e.arrow_at_to);
        }
    }
    while (!q.empty()) {
        auto [v, arrow_in] = q.front();
        q.pop_front();
        for (const auto& e : adj[v]) {
            bool collider = arrow_in && e.arrow_at_from;
            if (collider ? !an_z[v] : in_z[v]) continue;
            if (e.to == y) return false;
            size_t key = static_cast<size_t>(e.to) * 2 + (e.arrow_at_to ? 1 : 0);
            if (!visited[key]) {
                visited[key] = 1;
                q.emplace_back(e.to, e.arrow_at_to);
            }
        }
    }
    return true;
}

bool separable(const Admg& g, int x, int y) {
    std::vector<int> others;
    for (int v = 0; v < g.d; ++v)
        if (v != x && v != y) others.push_back(v);
    if (g.d <= 12) {
        size_t m = others.size();
        for (size_t mask = 0; mask < (size_t{1} << m); ++mask) {
            std::vector<int> z;
            for (size_t b = 0; b < m; ++b)
                if (mask & (size_t{1} << b)) z.push_back(others[b]);
            if (m_separated(g, x, y, z)) return true;
        }
        return false;
    }
    Eigen::MatrixXi r = ancestor_closure(g);
    std::vector<int> z;
    for (int v : others)
        if (r(v, x) || r(v, y)) z.push_back(v);
    return m_separated(g, x, y, z);
}

bool is_maximal(const Admg& g) {
    for (int i = 0; i < g.d; ++i)
        for (int j = i + 1; j < g.d; ++j)
            if (!g.adjacent(i, j) && !separable(g, i, j)) return false;
    return true;
}

Admg maximal_ancestral_projection(const Admg& g) {
    if (!is_ancestral(g))
        throw std::invalid_argument("maximal_ancestral_projection: input not ancestral");
    Eigen::MatrixXi r = ancestor_closure(g);
    Admg out = g;
    for (int i = 0; i < g.d; ++i)
        for (int j = i + 1; j < g.d; ++j) {
            if (g.adjacent(i, j) || separable(g, i, j)) continue;
            if (r(i, j)) out.D(i, j) = 1;
            else if (r(j, i)) out.D(j, i) = 1;
            else out.B(i, j) = out.B(j, i) = 1;
        }
    return out;
}

const char* mark_name(Mark m) {
    switch (m) {
        case Mark::None: return "none";
        case Mark::Circle: return "circle";
        case Mark::Arrow: return "arrow";
        case Mark::Tail: return "tail";
    }
    return "none";
}

Mark mark_from_name(const std::string& s) {
    if (s == "none") return Mark::None;
    if (s == "circle") return Mark::Circle;
    if (s == "arrow") return Mark::Arrow;
    if (s == "tail") return Mark::Tail;
    throw std::invalid_argument("unknown mark name: " + s);
}

Pag Pag::empty(int d) {
    if (d < 1) throw std::invalid_argument("Pag: d must be >= 1");
    Pag p;
    p.d = d;
    p.marks.assign(static_cast<size_t>(d) * d, Mark::None);
    return p;
}

void Pag::add_edge(int i, int j, Mark at_i, Mark at_j) {
    set_mark(j, i, at_i);
    set_mark(i, j, at_j);
}

void Pag::remove_edge(int i, int j) {
    set_mark(i, j, Mark::None);
    set_mark(j, i, Mark::None);
}

int Pag::edge_count() const {
    int n = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (adjacent(i, j)) ++n;
    return n;
}

namespace {

bool is_parent_in_pag(const Pag& p, int a, int b) {
    // a -> b with a hard tail at a.
    return p.adjacent(a, b) && p.mark(b, a) == Mark::Tail && p.mark(a, b) == Mark::Arrow;
}

// Harden a circle; returns true when a mark actually changed.
bool harden(Pag& p, int i, int j, Mark m) {
    if (p.mark(i, j) != Mark::Circle || m == Mark::Circle) return false;
    p.set_mark(i, j, m);
    return true;
}

// Possibly-directed edge from u to v under current marks.
bool pd_edge(const Pag& p, int u, int v) {
    if (!p.adjacent(u, v)) return false;
    return p.mark(v, u) != Mark::Arrow && p.mark(u, v) != Mark::Tail;
}

// Uncovered possibly-directed path from a through first towards target.
// BFS over (prev, cur) states; consecutive triple endpoints must be
// non-adjacent.
bool uncovered_pd_path(const Pag& p, int a, int first, int target) {
    if (first == target) return true;
    std::vector<char> visited(static_cast<size_t>(p.d) * p.d, 0);
    std::deque<std::pair<int, int>> q;
    q.emplace_back(a, first);
    visited[static_cast<size_t>(a) * p.d + first] = 1;
    while (!q.empty()) {
        auto [prev, cur] = q.front();
        q.pop_front();
        for (int nxt = 0; nxt < p.d; ++nxt) {
            if (nxt == cur || nxt == prev || nxt == a) continue;
            if (!pd_edge(p, cur, nxt)) continue;
            if (p.adjacent(prev, nxt)) continue;  // covered triple
            if (nxt == target) return true;
            size_t key = static_cast<size_t>(cur) * p.d + nxt;
            if (!visited[key]) {
                visited[key] = 1;
                q.emplace_back(cur, nxt);
            }
        }
    }
    return false;
}

bool rule_r1(Pag& p) {
    bool changed = false;
    for (int b = 0; b < p.d; ++b)
        for (int a = 0; a < p.d; ++a) {
            if (a == b || !p.adjacent(a, b) || p.mark(a, b) != Mark::Arrow) continue;
            for (int c = 0; c < p.d; ++c) {
                if (c == a || c == b || !p.adjacent(b, c) || p.adjacent(a, c)) continue;
                if (p.mark(c, b) != Mark::Circle) continue;
                changed |= harden(p, c, b, Mark::Tail);
                changed |= harden(p, b, c, Mark::Arrow);
            }
        }
    return changed;
}

bool rule_r2(Pag& p) {
    bool changed = false;
    for (int a = 0; a < p.d; ++a)
        for (int c = 0; c < p.d; ++c) {
            if (a == c || !p.adjacent(a, c) || p.mark(a, c) != Mark::Circle) continue;
            for (int b = 0; b < p.d; ++b) {
                if (b == a || b == c || !p.adjacent(a, b) || !p.adjacent(b, c)) continue;
                bool chain1 = is_parent_in_pag(p, a, b) && p.mark(b, c) == Mark::Arrow;
                bool chain2 = p.mark(a, b) == Mark::Arrow && is_parent_in_pag(p, b, c);
                if (chain1 || chain2) {
                    changed |= harden(p, a, c, Mark::Arrow);
                    break;
                }
            }
        }
    return changed;
}

bool rule_r3(Pag& p) {
    bool changed = false;
    for (int t = 0; t < p.d; ++t)
        for (int b = 0; b < p.d; ++b) {
            if (t == b || !p.adjacent(t, b) || p.mark(t, b) != Mark::Circle) continue;
            bool fired = false;
            for (int a = 0; a < p.d && !fired; ++a) {
                if (a == t || a == b) continue;
                if (!p.adjacent(a, b) || p.mark(a, b) != Mark::Arrow) continue;
                if (!p.adjacent(a, t) || p.mark(a, t) != Mark::Circle) continue;
                for (int c = 0; c < p.d; ++c) {
                    if (c == a || c == t || c == b || p.adjacent(a, c)) continue;
                    if (!p.adjacent(c, b) || p.mark(c, b) != Mark::Arrow) continue;
                    if (!p.adjacent(c, t) || p.mark(c, t) != Mark::Circle) continue;
                    changed |= harden(p, t, b, Mark::Arrow);
                    fired = true;
                    break;
                }
            }
        }
    return changed;
}

// Discriminating-path search for beta circle-* gamma. BFS backwards from
// (alpha, beta); intermediates must be already-oriented colliders that are
// parents of gamma.
bool rule_r4(Pag& p, const R4Decider& decider) {
    bool changed = false;
    for (int c = 0; c < p.d; ++c) {
        for (int b = 0; b < p.d; ++b) {
            if (b == c || !p.adjacent(b, c) || p.mark(c, b) != Mark::Circle) continue;
            for (int a = 0; a < p.d; ++a) {
                if (a == b || a == c) continue;
                if (!p.adjacent(a, b) || p.mark(b, a) != Mark::Arrow) continue;
                if (!is_parent_in_pag(p, a, c)) continue;
                // States (cur, nxt): path <cur, nxt, ..., b, c>. cur extends
                // only if it is a collider on the path (arrow at cur on both
                // incident path edges) and a parent of c.
                std::vector<char> visited(static_cast<size_t>(p.d) * p.d, 0);
                std::deque<std::pair<int, int>> q;
                q.emplace_back(a, b);
                visited[static_cast<size_t>(a) * p.d + b] = 1;
                int theta = -1;
                while (!q.empty() && theta < 0) {
                    auto [cur, nxt] = q.front();
                    q.pop_front();
                    for (int t = 0; t < p.d; ++t) {
                        if (t == cur || t == nxt || t == c) continue;
                        if (!p.adjacent(t, cur)) continue;
                        // cur becomes an intermediate vertex.
                        if (p.mark(nxt, cur) != Mark::Arrow) continue;
                        if (p.mark(t, cur) != Mark::Arrow) continue;
                        if (!is_parent_in_pag(p, cur, c)) continue;
                        if (!p.adjacent(t, c)) {
                            theta = t;
                            break;
                        }
                        size_t key = static_cast<size_t>(t) * p.d + cur;
                        if (!visited[key]) {
                            visited[key] = 1;
                            q.emplace_back(t, cur);
                        }
                    }
                }
                if (theta < 0) continue;
                if (decider(theta, a, b, c)) {
                    changed |= harden(p, c, b, Mark::Tail);
                    changed |= harden(p, b, c, Mark::Arrow);
                } else {
                    changed |= harden(p, b, a, Mark::Arrow);
                    changed |= harden(p, a, b, Mark::Arrow);
                    changed |= harden(p, c, b, Mark::Arrow);
                    changed |= harden(p, b, c, Mark::Arrow);
                }
                break;
            }
        }
    }
    return changed;
}

bool rule_r8(Pag& p) {
    bool changed = false;
    for (int a = 0; a < p.d; ++a)
        for (int c = 0; c < p.d; ++c) {
            if (a == c || !p.adjacent(a, c)) continue;
            if (p.mark(c, a) != Mark::Circle || p.mark(a, c) != Mark::Arrow) continue;
            for (int b = 0; b < p.d; ++b) {
                if (b == a || b == c) continue;
                if (is_parent_in_pag(p, a, b) && is_parent_in_pag(p, b, c)) {
                    changed |= harden(p, c, a, Mark::Tail);
                    break;
                }
            }
        }
    return changed;
}

bool rule_r9(Pag& p) {
    bool changed = false;
    for (int a = 0; a < p.d; ++a)
        for (int c = 0; c < p.d; ++c) {
            if (a == c || !p.adjacent(a, c)) continue;
            if (p.mark(c, a) != Mark::Circle || p.mark(a, c) != Mark::Arrow) continue;
            for (int b = 0; b < p.d; ++b) {
                if (b == a || b == c || p.adjacent(b, c)) continue;
                if (!pd_edge(p, a, b)) continue;
                if (uncovered_pd_path(p, a, b, c)) {
                    changed |= harden(p, c, a, Mark::Tail);
                    break;
                }
            }
        }
    return changed;
}

bool rule_r10(Pag& p) {
    bool changed = false;
    for (int a = 0; a < p.d; ++a)
        for (int c = 0; c < p.d; ++c) {
            if (a == c || !p.adjacent(a, c)) continue;
            if (p.mark(c, a) != Mark::Circle || p.mark(a, c) != Mark::Arrow) continue;
            std::vector<int> parents;
            for (int v = 0; v < p.d; ++v)
                if (v != c && v != a && is_parent_in_pag(p, v, c)) parents.push_back(v);
            if (parents.size() < 2) continue;
            // mu, omega: first vertices of uncovered pd paths from a reaching
            // two distinct parents of c.
            std::vector<std::vector<char>> reach;  // per neighbor, which parents
            std::vector<int> nbrs;
            for (int m = 0; m < p.d; ++m) {
                if (m == a || m == c || !pd_edge(p, a, m)) continue;
                std::vector<char> r(parents.size(), 0);
                for (size_t pi = 0; pi < parents.size(); ++pi)
                    if (uncovered_pd_path(p, a, m, parents[pi])) r[pi] = 1;
                nbrs.push_back(m);
                reach.push_back(std::move(r));
            }
            bool fired = false;
            for (size_t x = 0; x < nbrs.size() && !fired; ++x)
                for (size_t y = x + 1; y < nbrs.size() && !fired; ++y) {
                    if (p.adjacent(nbrs[x], nbrs[y])) continue;
                    for (size_t pi = 0; pi < parents.size() && !fired; ++pi)
                        for (size_t pj = 0; pj < parents.size() && !fired; ++pj) {
                            if (pi == pj) continue;
                            if (reach[x][pi] && reach[y][pj]) {
                                changed |= harden(p, c, a, Mark::Tail);
                                fired = true;
                            }
                        }
                }
        }
    return changed;
}

}  // namespace

void apply_orientation_rules(Pag& pag, const R4Decider& r4) {
    bool changed = true;
    while (changed) {
        changed = false;
        changed |= rule_r1(pag);
        changed |= rule_r2(pag);
        changed |= rule_r3(pag);
        changed |= rule_r4(pag, r4);
        changed |= rule_r8(pag);
        changed |= rule_r9(pag);
        changed |= rule_r10(pag);
    }
}

Pag pag_of_admg_marks(const Admg& g) {
    Pag p = Pag::empty(g.d);
    for (int i = 0; i < g.d; ++i)
        for (int j = i + 1; j < g.d; ++j)
            if (g.adjacent(i, j)) p.add_edge(i, j, Mark::Circle, Mark::Circle);

    // Unshielded colliders are invariant across the equivalence class.
    auto arrow_at = [&](int from, int at) {
        return (g.D(from, at) || g.B(from, at)) != 0;
    };
    for (int k = 0; k < g.d; ++k)
        for (int i = 0; i < g.d; ++i) {
            if (i == k || !g.adjacent(i, k)) continue;
            for (int j = i + 1; j < g.d; ++j) {
                if (j == k || !g.adjacent(j, k) || g.adjacent(i, j)) continue;
                if (arrow_at(i, k) && arrow_at(j, k)) {
                    harden(p, i, k, Mark::Arrow);
                    harden(p, j, k, Mark::Arrow);
                }
            }
        }

    R4Decider decider = [&g](int, int, int beta, int gamma) {
        return g.D(beta, gamma) != 0;  // tail at beta in the MAG
    };
    apply_orientation_rules(p, decider);
    return p;
}

Pag mag_to_pag(const Admg& mag) {
    if (!is_ancestral(mag)) throw std::invalid_argument("mag_to_pag: input not ancestral");
    if (!is_maximal(mag)) throw std::invalid_argument("mag_to_pag: input not maximal");
    return pag_of_admg_marks(mag);
}

namespace {

// Maximum cardinality search positions over an undirected 0/1 adjacency.
// On a chordal graph the earlier-visited neighbors of every vertex form a
// clique, so orienting each edge from the earlier position to the later one
// creates no unshielded collider. Ties pick the lowest index.
std::vector<int> mcs_positions(const std::vector<std::vector<char>>& adj) {
    const int d = static_cast<int>(adj.size());
    std::vector<int> pos(d, -1), weight(d, 0);
    std::vector<char> used(d, 0);
    for (int step = 0; step < d; ++step) {
        int best = -1;
        for (int v = 0; v < d; ++v)
            if (!used[v] && (best < 0 || weight[v] > weight[best])) best = v;
        used[best] = 1;
        pos[best] = step;
        for (int u = 0; u < d; ++u)
            if (!used[u] && adj[best][u]) ++weight[u];
    }
    return pos;
}

}  // namespace

Admg pag_to_mag(const Pag& pag) {
    const int d = pag.d;
    Admg g = Admg::empty(d);
    // Arrow-arrow edges stay bidirected; a single arrowhead fixes the edge
    // direction (the circle or tail at the other end becomes the tail); a
    // lone tail points out of its end. Circle-circle edges form the circle
    // component, oriented collider-free along the MCS order below.
    std::vector<std::vector<char>> circ(d, std::vector<char>(d, 0));
    struct Want {
        int from, to;
    };
    std::vector<Want> directed;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            if (!pag.adjacent(i, j)) continue;
            const Mark at_i = pag.mark(j, i);
            const Mark at_j = pag.mark(i, j);
            if (at_i == Mark::Arrow && at_j == Mark::Arrow)
                g.B(i, j) = g.B(j, i) = 1;
            else if (at_j == Mark::Arrow)
                directed.push_back({i, j});
            else if (at_i == Mark::Arrow)
                directed.push_back({j, i});
            else if (at_i == Mark::Tail && at_j != Mark::Tail)
                directed.push_back({i, j});
            else if (at_j == Mark::Tail && at_i != Mark::Tail)
                directed.push_back({j, i});
            else
                circ[i][j] = circ[j][i] = 1;
        }
    const std::vector<int> pos = mcs_positions(circ);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (circ[i][j]) {
                if (pos[i] < pos[j])
                    directed.push_back({i, j});
                else
                    directed.push_back({j, i});
            }
    // Incremental reachability guard: an edge whose addition would close a
    // directed cycle (inconsistent finite-sample marks) degrades to
    // bidirected, which at least keeps its arrowhead. Valid class PAGs never
    // trigger it.
    std::vector<std::vector<char>> reach(d, std::vector<char>(d, 0));
    for (const Want& w : directed) {
        if (reach[w.to][w.from]) {
            g.B(w.from, w.to) = g.B(w.to, w.from) = 1;
            continue;
        }
        g.D(w.from, w.to) = 1;
        for (int a = 0; a < d; ++a) {
            if (a != w.from && !reach[a][w.from]) continue;
            for (int b = 0; b < d; ++b)
                if (b == w.to || reach[w.to][b]) reach[a][b] = 1;
        }
    }
    // Demote bidirected edges inside ancestor relations; adding i -> j when i
    // already reaches j leaves the closure unchanged, so one pass suffices.
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            if (!g.B(i, j)) continue;
            if (reach[i][j]) {
                g.B(i, j) = g.B(j, i) = 0;
                g.D(i, j) = 1;
            } else if (reach[j][i]) {
                g.B(i, j) = g.B(j, i) = 0;
                g.D(j, i) = 1;
            }
        }
    return g;
}

}  // namespace spotcd
