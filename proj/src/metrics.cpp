#include "spotcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spotcd {

PrfStats prf_from_counts(long tp, long fp, long fn) {
    PrfStats s;
    s.tp = tp;
    s.fp = fp;
    s.fn = fn;
    if (tp + fn > 0) {
        s.tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
        s.tpr_defined = true;
    }
    if (tp + fp > 0) {
        s.fdr = static_cast<double>(fp) / static_cast<double>(tp + fp);
        s.fdr_defined = true;
    }
    if (s.tpr_defined && s.fdr_defined) {
        double precision = 1.0 - s.fdr;
        double recall = s.tpr;
        if (precision + recall > 0.0) {
            s.f1 = 2.0 * precision * recall / (precision + recall);
            s.f1_defined = true;
        } else {
            s.f1 = 0.0;
            s.f1_defined = true;  // 0/0 of P,R both zero: defined zero
        }
    }
    return s;
}

PagMetrics pag_metrics(const Pag& predicted, const Pag& truth) {
    if (predicted.d != truth.d) throw std::invalid_argument("pag_metrics: node count mismatch");
    int d = truth.d;
    long stp = 0, sfp = 0, sfn = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            bool pa = predicted.adjacent(i, j);
            bool ta = truth.adjacent(i, j);
            if (pa && ta) ++stp;
            else if (pa) ++sfp;
            else if (ta) ++sfn;
        }
    long atp = 0, afp = 0, afn = 0, ttp = 0, tfp = 0, tfn = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            bool pred_arrow = predicted.adjacent(i, j) && predicted.mark(i, j) == Mark::Arrow;
            bool true_arrow = truth.adjacent(i, j) && truth.mark(i, j) == Mark::Arrow;
            if (pred_arrow && true_arrow) ++atp;
            else if (pred_arrow) ++afp;
            else if (true_arrow) ++afn;
            bool pred_tail = predicted.adjacent(i, j) && predicted.mark(i, j) == Mark::Tail;
            bool true_tail = truth.adjacent(i, j) && truth.mark(i, j) == Mark::Tail;
            if (pred_tail && true_tail) ++ttp;
            else if (pred_tail) ++tfp;
            else if (true_tail) ++tfn;
        }
    PagMetrics m;
    m.skeleton = prf_from_counts(stp, sfp, sfn);
    m.arrowhead = prf_from_counts(atp, afp, afn);
    m.tail = prf_from_counts(ttp, tfp, tfn);
    return m;
}

int shd(const Pag& predicted, const Pag& truth) {
    if (predicted.d != truth.d) throw std::invalid_argument("shd: node count mismatch");
    int d = truth.d;
    int out = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            bool pa = predicted.adjacent(i, j);
            bool ta = truth.adjacent(i, j);
            if (pa != ta) ++out;
            else if (pa && (predicted.mark(i, j) != truth.mark(i, j) ||
                            predicted.mark(j, i) != truth.mark(j, i)))
                ++out;
        }
    return out;
}

PosteriorQuality posterior_quality(const Eigen::MatrixXd& posterior,
                                   const Eigen::MatrixXi& true_skeleton) {
    int d = static_cast<int>(true_skeleton.rows());
    if (true_skeleton.cols() != d || posterior.rows() != d || posterior.cols() != d)
        throw std::invalid_argument("posterior_quality: shape mismatch");
    std::vector<double> score;
    std::vector<int> label;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            double p = posterior(i, j);
            if (std::isnan(p)) throw std::invalid_argument("posterior_quality: NaN score");
            score.push_back(p);
            label.push_back(true_skeleton(i, j) ? 1 : 0);
        }
    long npos = 0, nneg = 0;
    for (int l : label) (l ? npos : nneg)++;

    PosteriorQuality q;
    const double eps = 1e-6;
    double kl = 0.0;
    for (size_t k = 0; k < score.size(); ++k) {
        double p = std::min(1.0 - eps, std::max(eps, score[k]));
        kl += label[k] ? -std::log(p) : -std::log1p(-p);
    }
    q.kl = score.empty() ? 0.0 : kl / static_cast<double>(score.size());
    if (npos == 0 || nneg == 0) {
        q.defined = false;
        return q;
    }
    q.defined = true;

    // AUROC: Mann-Whitney with average ranks for ties.
    std::vector<size_t> idx(score.size());
    for (size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return score[a] < score[b]; });
    double rank_sum_pos = 0.0;
    size_t k = 0;
    while (k < idx.size()) {
        size_t k2 = k;
        while (k2 + 1 < idx.size() && score[idx[k2 + 1]] == score[idx[k]]) ++k2;
        double avg_rank = 0.5 * (static_cast<double>(k + 1) + static_cast<double>(k2 + 1));
        for (size_t t = k; t <= k2; ++t)
            if (label[idx[t]]) rank_sum_pos += avg_rank;
        k = k2 + 1;
    }
    q.auroc = (rank_sum_pos - 0.5 * static_cast<double>(npos) * (npos + 1)) /
              (static_cast<double>(npos) * static_cast<double>(nneg));

    // Average precision over unique thresholds, descending.
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return score[a] > score[b]; });
    double ap = 0.0;
    long tp = 0, fp = 0;
    double prev_recall = 0.0;
    k = 0;
    while (k < idx.size()) {
        size_t k2 = k;
        while (k2 + 1 < idx.size() && score[idx[k2 + 1]] == score[idx[k]]) ++k2;
        for (size_t t = k; t <= k2; ++t) (label[idx[t]] ? tp : fp)++;
        double recall = static_cast<double>(tp) / static_cast<double>(npos);
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        k = k2 + 1;
    }
    q.auprc = ap;
    return q;
}

}  // namespace spotcd
