#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "spotcd/scm.hpp"

namespace spotcd {

struct FeatureConfig {
    int top_m = 8;                  // candidate neighbors per endpoint
    int max_subsets_per_side = 32;  // lexicographic cap per endpoint and size
    double prune_threshold = 0.01;  // cascade pruning / candidate floor
};

// Conditioning sizes tested at stage s are 1..stage_cond_cap(s); the size-0
// p-value sits in the base block.
int stage_cond_cap(int stage);
int feature_length(int stage);

// Ranked candidate-neighbor lists: score desc, column-name tie-break, entries
// below min_score dropped, truncated to top_m. Name tie-breaks travel with
// column permutations, which keeps downstream features exactly
// permutation-equivariant.
std::vector<std::vector<int>> candidate_neighbors(const Eigen::MatrixXd& score,
                                                  const std::vector<std::string>& names,
                                                  double min_score, int top_m);

struct StageFeatures {
    std::vector<std::pair<int, int>> pairs;  // i < j, row order of X
    Eigen::MatrixXd X;
    std::vector<int> degenerate;  // flagged near-constant columns
};

// Per-pair feature rows for one cascade stage. Base block:
// [r, |r|, p0, d, n_min, n_max, overlap, prev_score (stage >= 1)], then for
// each conditioning size k six aggregates [min, q25, med, q75, max, mean] of
// Fisher-z p-values over lexicographic subsets of the two endpoint candidate
// pools. Failed or missing tests contribute the sentinel p = 1.
// prev_scores must be null exactly at stage 0; it supplies both the
// prev_score feature and the candidate ranking for stages >= 1 (stage 0
// ranks candidates by |correlation|).
StageFeatures extract_pair_features(const Eigen::MatrixXd& cov, int n,
                                    const std::vector<std::string>& names, int stage,
                                    const Eigen::MatrixXd* prev_scores,
                                    const std::vector<std::pair<int, int>>& active,
                                    const FeatureConfig& cfg = {});

// All pairs of one dataset.
StageFeatures extract_pair_features(const Dataset& data, int stage,
                                    const Eigen::MatrixXd* prev_scores,
                                    const FeatureConfig& cfg = {});

std::vector<std::pair<int, int>> all_pairs(int d);

}  // namespace spotcd
