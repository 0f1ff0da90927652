#pragma once

#include <Eigen/Dense>
#include <vector>

namespace spotcd {

struct GbdtConfig {
    int n_trees = 150;
    int max_depth = 4;
    double learning_rate = 0.1;
    double reg_lambda = 1.0;  // l2 on leaf weights
    int min_leaf = 1;         // minimum rows per side of a split
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf weight, learning rate applied
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct GbdtModel {
    GbdtConfig cfg;
    int n_features = 0;
    double base_score = 0.0;  // initial log-odds
    std::vector<Tree> trees;

    double predict_margin(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    double predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    Eigen::VectorXd predict_proba_rows(const Eigen::MatrixXd& X) const;
};

// Binary logistic boosting with exact greedy level-order splits over globally
// presorted feature columns. Soft labels in [0, 1] are allowed. Feature
// parallelism only; split ties break on (feature index, threshold), so the
// model is identical for any thread count.
GbdtModel gbdt_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const GbdtConfig& cfg = {});

// Isotonic regression calibrator (pool adjacent violators), applied with
// linear interpolation between block centers and clamped to
// [1e-3, 1 - 1e-3].
struct IsotonicModel {
    std::vector<double> x;  // block centers, strictly increasing
    std::vector<double> y;  // non-decreasing calibrated values
    double apply(double v) const;
};

IsotonicModel isotonic_fit(const std::vector<double>& scores,
                           const std::vector<double>& labels);

}  // namespace spotcd
