#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spotcd/fci.hpp"
#include "spotcd/features.hpp"
#include "spotcd/gbdt.hpp"
#include "spotcd/scm.hpp"

namespace spotcd {

struct CascadeStage {
    GbdtModel gbdt;
    IsotonicModel calib;
    bool constant = false;        // degenerate single-class stage
    double constant_value = 0.5;  // emitted when constant

    double score(const Eigen::Ref<const Eigen::RowVectorXd>& features) const;
};

struct CascadeConfig {
    FeatureConfig features;
    GbdtConfig gbdt;  // per-stage learner
    int stages = 3;
    double label_smoothing = 0.05;
    double decision_threshold = 0.25;  // recall-favoring hard-skeleton cut
    int calib_stride = 5;              // every calib_stride-th dataset calibrates
    std::uint64_t seed = 0;            // recorded; training itself is deterministic
};

struct CascadeModel {
    int schema_version = 1;
    CascadeConfig cfg;
    std::vector<CascadeStage> stages;
    std::vector<std::string> corpus_ids;
};

struct CorpusEntry {
    Dataset data;
    Eigen::MatrixXi skeleton;  // 0/1 symmetric adjacency label
    std::string id;
};

std::vector<CorpusEntry> corpus_entries(const std::vector<CorpusItem>& items);

// Stage-by-stage training on (dataset, skeleton) pairs: smoothed Bernoulli
// targets, isotonic calibration on every calib_stride-th dataset with raw
// labels, pruning between stages at features.prune_threshold. Single-class
// stages degrade to constants with a warning on stderr.
CascadeModel train_cascade(const std::vector<CorpusEntry>& corpus,
                           const CascadeConfig& cfg = {});

struct PosteriorDetail {
    Eigen::MatrixXd posterior;
    // Stage score matrices; pairs pruned before a stage carry their frozen
    // score forward.
    std::vector<Eigen::MatrixXd> stage_scores;
};

PosteriorDetail infer_posterior_detail(const CascadeModel& model, const Dataset& data);
Eigen::MatrixXd infer_posterior(const CascadeModel& model, const Dataset& data);

// Hard skeleton at the recall-favoring decision threshold.
Eigen::MatrixXi posterior_skeleton(const Eigen::MatrixXd& posterior, double threshold);

// Dynamic-simulator corpus: per replica subsample rows without replacement,
// fci_learn a MAG, refit its parameters on the full input data, regenerate a
// fresh dataset from the fitted SCM, and label it with the learned skeleton.
// Failed replicas are skipped with a warning.
std::vector<CorpusEntry> bootstrap_dynamic_corpus(const Dataset& data, int replicas,
                                                  double subsample_fraction,
                                                  std::uint64_t seed,
                                                  const FciConfig& fci_cfg = {});

struct AdaptConfig {
    GbdtConfig gbdt{80, 3, 0.1, 1.0, 1};
    double label_smoothing = 0.05;
    int calib_stride = 5;
};

// Few-shot domain adaptation: a lightweight head trained on final-stage-style
// features augmented with the static model's first-stage and final scores.
// The static model is copied in unchanged.
struct AdaptedModel {
    CascadeModel base;
    GbdtModel gbdt;
    IsotonicModel calib;
    bool constant = false;
    double constant_value = 0.5;
};

AdaptedModel adapt_model(const CascadeModel& model,
                         const std::vector<CorpusEntry>& dynamic_corpus,
                         const AdaptConfig& cfg = {});
Eigen::MatrixXd infer_posterior(const AdaptedModel& model, const Dataset& data);

// Bootstrap-FCI skeleton-frequency posterior (the FCI* analog baseline).
Eigen::MatrixXd fci_star_posterior(const Dataset& data, int replicas,
                                   double subsample_fraction, std::uint64_t seed,
                                   const FciConfig& cfg = {});

}  // namespace spotcd
