#pragma once

#include <Eigen/Dense>

#include "spotcd/graph.hpp"

namespace spotcd {

// One precision/recall family. Undefined ratios (empty denominators) are
// reported as 0 with the matching flag cleared rather than NaN.
struct PrfStats {
    double f1 = 0.0;
    double tpr = 0.0;
    double fdr = 0.0;
    bool f1_defined = false;
    bool tpr_defined = false;
    bool fdr_defined = false;
    long tp = 0, fp = 0, fn = 0;
};

PrfStats prf_from_counts(long tp, long fp, long fn);

struct PagMetrics {
    PrfStats skeleton;
    PrfStats arrowhead;
    PrfStats tail;
};

// Endpoint-level comparison of two PAGs on the same node set. Circle marks
// count as neither arrow nor tail on either side.
PagMetrics pag_metrics(const Pag& predicted, const Pag& truth);

// Structural hamming distance over unordered pairs: missing or extra edges
// count one each, shared edges with a differing mark pair count one.
int shd(const Pag& predicted, const Pag& truth);

struct PosteriorQuality {
    double auroc = 0.0;
    double auprc = 0.0;
    double kl = 0.0;
    bool defined = false;  // false when the truth has a single class
};

// Skeleton-posterior quality against a 0/1 adjacency truth. The posterior is
// clamped to [1e-6, 1 - 1e-6] for the KL term. AUROC uses the rank statistic
// with average ranks on ties.
PosteriorQuality posterior_quality(const Eigen::MatrixXd& posterior,
                                   const Eigen::MatrixXi& true_skeleton);

}  // namespace spotcd
