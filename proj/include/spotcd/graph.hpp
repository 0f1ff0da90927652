#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace spotcd {

// Acyclic directed mixed graph over nodes 0..d-1. D[i][j] = 1 encodes i -> j,
// B[i][j] = B[j][i] = 1 encodes i <-> j. Matrices hold 0/1 with zero diagonal.
struct Admg {
    int d = 0;
    Eigen::MatrixXi D;
    Eigen::MatrixXi B;

    static Admg empty(int d);
    bool adjacent(int i, int j) const { return D(i, j) || D(j, i) || B(i, j); }
    int edge_count() const;
    bool operator==(const Admg& o) const { return d == o.d && D == o.D && B == o.B; }
};

// Throws std::invalid_argument if entries are not 0/1, the diagonal is not
// zero, or B is asymmetric.
void validate(const Admg& g);

// Symmetric 0/1 adjacency ignoring edge types.
Eigen::MatrixXi skeleton_of(const Admg& g);

bool has_directed_cycle(const Admg& g);

// closure(i, j) = 1 iff there is a directed path i -> ... -> j of length >= 1.
Eigen::MatrixXi ancestor_closure(const Admg& g);

// Ancestors of i via directed paths, including i itself.
std::vector<int> ancestors(const Admg& g, int i);

// No directed cycle and no bidirected edge between ancestor-related nodes.
// A parent counts as an ancestor, so a bow (i -> j plus i <-> j) fails.
bool is_ancestral(const Admg& g);

// No pair carries both a directed and a bidirected edge.
bool is_bow_free(const Admg& g);

// m-separation of x and y given z in an ADMG. Blocked paths are those with a
// non-collider in z or a collider outside the ancestor closure of z.
// Preconditions: x != y, neither endpoint in z.
bool m_separated(const Admg& g, int x, int y, const std::vector<int>& z);

// Whether some subset of V \ {x, y} m-separates the (non-adjacent) pair.
// Exhaustive for d <= 12, otherwise tests the ancestor-restricted candidate
// set An({x, y}) \ {x, y}.
bool separable(const Admg& g, int x, int y);

// Every non-adjacent pair is m-separable by some subset.
bool is_maximal(const Admg& g);

// Adds an edge for every inseparable non-adjacent pair: i -> j when i is an
// ancestor of j, j -> i in the converse case, i <-> j otherwise.
// Precondition: g is ancestral. Result is a MAG with the same separations.
Admg maximal_ancestral_projection(const Admg& g);

enum class Mark : unsigned char { None = 0, Circle = 1, Arrow = 2, Tail = 3 };

const char* mark_name(Mark m);
Mark mark_from_name(const std::string& s);

// Partial ancestral graph: mark(i, j) is the mark at j's end of edge i - j.
struct Pag {
    int d = 0;
    std::vector<Mark> marks;

    static Pag empty(int d);
    Mark mark(int i, int j) const { return marks[static_cast<size_t>(i) * d + j]; }
    void set_mark(int i, int j, Mark m) { marks[static_cast<size_t>(i) * d + j] = m; }
    bool adjacent(int i, int j) const { return i != j && mark(i, j) != Mark::None; }
    void add_edge(int i, int j, Mark at_i, Mark at_j);
    void remove_edge(int i, int j);
    int edge_count() const;
    bool operator==(const Pag& o) const { return d == o.d && marks == o.marks; }
};

// Decides the discriminating-path rule: given a discriminating path
// <theta, ..., alpha, beta, gamma>, return true when beta - gamma should be
// oriented beta -> gamma (otherwise the triple becomes alpha <-> beta <-> gamma).
using R4Decider = std::function<bool(int theta, int alpha, int beta, int gamma)>;

// Zhang's orientation rules without the selection-bias rules: R1-R4 plus
// R8-R10, applied to a fixpoint. Circle marks only ever harden; existing
// arrow/tail marks are never overwritten. Scan order is ascending node index.
void apply_orientation_rules(Pag& pag, const R4Decider& r4);

// PAG of a maximal ancestral graph via invariant unshielded colliders plus the
// complete rule set. Validates ancestrality and maximality.
Pag mag_to_pag(const Admg& mag);

// Same construction without the maximality check; used on learner outputs
// whose skeleton must be preserved exactly.
Pag pag_of_admg_marks(const Admg& g);

// One ancestral graph consistent with the PAG's skeleton: invariant arrows are
// kept, circle components are oriented collider-free along a maximum
// cardinality search order, and bidirected edges in ancestor relations are
// demoted to directed edges.
Admg pag_to_mag(const Pag& pag);

}  // namespace spotcd
