#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "spotcd/citest.hpp"
#include "spotcd/graph.hpp"
#include "spotcd/scm.hpp"

namespace spotcd {

// Conditional-independence test seam: returns the p-value machinery for
// testing i _||_ j given z. Learners only consume p-values.
using CiFunction = std::function<CiResult(int, int, const std::vector<int>&)>;

// Fisher-z test bound to a covariance cache.
CiFunction gaussian_ci(CiCache cache);

// Exact m-separation oracle on a known graph: p = 1 when separated, else 0.
CiFunction oracle_ci(Admg g);

struct FciConfig {
    double alpha = 0.01;
    int max_cond_size = 4;
    bool possible_dsep = true;
};

using SepsetMap = std::map<std::pair<int, int>, std::vector<int>>;

struct FciResult {
    Pag pag;
    Admg mag;  // concretization of pag
    SepsetMap sepsets;
    long ci_tests = 0;
};

FciResult fci_learn_ci(int d, const CiFunction& ci, const FciConfig& cfg = {});
FciResult fci_learn(const Dataset& data, const FciConfig& cfg = {});

// Skeleton phase only, recording per pair the maximum p-value seen across
// tested conditioning sets. max_p is symmetric; untested pairs stay 0.
struct SkeletonEvidence {
    Eigen::MatrixXi adj;
    Eigen::MatrixXd max_p;
};

SkeletonEvidence fci_skeleton_with_pvalues(const Dataset& data, const FciConfig& cfg = {});

}  // namespace spotcd
