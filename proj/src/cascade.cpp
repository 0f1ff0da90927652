#include "spotcd/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "spotcd/citest.hpp"
#include "spotcd/parallel.hpp"
#include "spotcd/ricf.hpp"

namespace spotcd {

double CascadeStage::score(const Eigen::Ref<const Eigen::RowVectorXd>& features) const {
    if (constant) return constant_value;
    return calib.apply(gbdt.predict_proba(features));
}

std::vector<CorpusEntry> corpus_entries(const std::vector<CorpusItem>& items) {
    std::vector<CorpusEntry> out;
    out.reserve(items.size());
    for (size_t i = 0; i < items.size(); ++i)
        out.push_back({items[i].data, skeleton_of(items[i].graph),
                       "static-" + std::to_string(i)});
    return out;
}

namespace {

IsotonicModel identity_calibration() {
    IsotonicModel m;
    m.x = {0.0, 1.0};
    m.y = {0.0, 1.0};
    return m;
}

void check_entry(const CorpusEntry& e) {
    validate(e.data);
    const int d = e.data.d();
    if (e.skeleton.rows() != d || e.skeleton.cols() != d)
        throw std::invalid_argument("cascade: skeleton dimension mismatch in " + e.id);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (e.skeleton(i, j) != e.skeleton(j, i) || (i == j && e.skeleton(i, i) != 0) ||
                e.skeleton(i, j) < 0 || e.skeleton(i, j) > 1)
                throw std::invalid_argument("cascade: invalid skeleton label in " + e.id);
        }
}

// Trains one boosted stage head with isotonic calibration; returns a constant
// stage when the training labels are single-class.
struct HeadFit {
    GbdtModel gbdt;
    IsotonicModel calib;
    bool constant = false;
    double constant_value = 0.5;
};

HeadFit fit_head(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train_raw,
                 const Eigen::MatrixXd& X_calib, const Eigen::VectorXd& y_calib_raw,
                 const GbdtConfig& gcfg, double smoothing, const char* what) {
    HeadFit head;
    const double lo = smoothing / 2.0;
    const double hi = 1.0 - smoothing / 2.0;

    bool any0 = false, any1 = false;
    for (Eigen::Index r = 0; r < y_train_raw.size(); ++r)
        (y_train_raw(r) > 0.5 ? any1 : any0) = true;
    if (!any0 || !any1) {
        head.constant = true;
        head.constant_value = any1 ? hi : lo;
        head.calib = identity_calibration();
        std::cerr << "warning: " << what << " trained on single-class labels; using constant "
                  << head.constant_value << "\n";
        return head;
    }

    Eigen::VectorXd y_sm = y_train_raw.unaryExpr([&](double y) { return y * (hi - lo) + lo; });
    head.gbdt = gbdt_train(X_train, y_sm, gcfg);

    bool calib_ok = X_calib.rows() > 0;
    if (calib_ok) {
        bool c0 = false, c1 = false;
        for (Eigen::Index r = 0; r < y_calib_raw.size(); ++r)
            (y_calib_raw(r) > 0.5 ? c1 : c0) = true;
        calib_ok = c0 && c1;
    }
    if (!calib_ok) {
        head.calib = identity_calibration();
        return head;
    }
    std::vector<double> scores(static_cast<size_t>(X_calib.rows()));
    std::vector<double> labels(static_cast<size_t>(X_calib.rows()));
    Eigen::VectorXd probs = head.gbdt.predict_proba_rows(X_calib);
    for (Eigen::Index r = 0; r < X_calib.rows(); ++r) {
        scores[static_cast<size_t>(r)] = probs(r);
        labels[static_cast<size_t>(r)] = y_calib_raw(r);
    }
    head.calib = isotonic_fit(scores, labels);
    return head;
}

Dataset subsample_rows(const Dataset& data, double fraction, Rng& rng) {
    const int n = data.n();
    int m = static_cast<int>(std::floor(fraction * n));
    m = std::clamp(m, std::min(2, n), n);
    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    idx.resize(static_cast<size_t>(m));
    std::sort(idx.begin(), idx.end());
    Dataset out;
    out.names = data.names;
    out.X.resize(m, data.d());
    for (int r = 0; r < m; ++r) out.X.row(r) = data.X.row(idx[static_cast<size_t>(r)]);
    return out;
}

}  // namespace

CascadeModel train_cascade(const std::vector<CorpusEntry>& corpus, const CascadeConfig& cfg) {
    if (corpus.empty()) throw std::invalid_argument("train_cascade: empty corpus");
    if (cfg.stages < 1) throw std::invalid_argument("train_cascade: need >= 1 stage");
    for (const CorpusEntry& e : corpus) check_entry(e);

    CascadeModel model;
    model.cfg = cfg;
    for (const CorpusEntry& e : corpus) model.corpus_ids.push_back(e.id);

    const size_t nds = corpus.size();
    std::vector<Eigen::MatrixXd> covs(nds);
    std::vector<Eigen::MatrixXd> prev(nds);
    std::vector<std::vector<std::pair<int, int>>> active(nds);
    std::vector<bool> is_calib(nds);
    for (size_t k = 0; k < nds; ++k) {
        covs[k] = covariance_matrix(corpus[k].data.X);
        active[k] = all_pairs(corpus[k].data.d());
        is_calib[k] = cfg.calib_stride > 0 && (k % static_cast<size_t>(cfg.calib_stride)) == static_cast<size_t>(cfg.calib_stride) - 1;
    }
    // A corpus too small to spare a calibration split calibrates on the
    // training rows instead.
    if (std::none_of(is_calib.begin(), is_calib.end(), [](bool b) { return b; }) ||
        std::all_of(is_calib.begin(), is_calib.end(), [](bool b) { return b; }))
        std::fill(is_calib.begin(), is_calib.end(), false);

    for (int s = 0; s < cfg.stages; ++s) {
        std::vector<StageFeatures> feats(nds);
        for (size_t k = 0; k < nds; ++k)
            feats[k] = extract_pair_features(covs[k], corpus[k].data.n(), corpus[k].data.names,
                                             s, s == 0 ? nullptr : &prev[k], active[k],
                                             cfg.features);

        long n_train = 0, n_calib = 0;
        for (size_t k = 0; k < nds; ++k)
            (is_calib[k] ? n_calib : n_train) += static_cast<long>(feats[k].pairs.size());
        const int len = feature_length(s);
        Eigen::MatrixXd Xt(n_train, len), Xc(n_calib, len);
        Eigen::VectorXd yt(n_train), yc(n_calib);
        long rt = 0, rc = 0;
        for (size_t k = 0; k < nds; ++k) {
            for (size_t r = 0; r < feats[k].pairs.size(); ++r) {
                const auto [i, j] = feats[k].pairs[r];
                const double y = corpus[k].skeleton(i, j);
                if (is_calib[k]) {
                    Xc.row(rc) = feats[k].X.row(static_cast<Eigen::Index>(r));
                    yc(rc++) = y;
                } else {
                    Xt.row(rt) = feats[k].X.row(static_cast<Eigen::Index>(r));
                    yt(rt++) = y;
                }
            }
        }
        if (n_train == 0) throw std::runtime_error("train_cascade: no training rows survive");

        const std::string what = "cascade stage " + std::to_string(s);
        HeadFit head = fit_head(Xt, yt, Xc, yc, cfg.gbdt, cfg.label_smoothing, what.c_str());
        CascadeStage stage{std::move(head.gbdt), std::move(head.calib), head.constant,
                           head.constant_value};

        for (size_t k = 0; k < nds; ++k) {
            const int d = corpus[k].data.d();
            Eigen::MatrixXd score = s == 0 ? Eigen::MatrixXd::Zero(d, d) : prev[k];
            std::vector<std::pair<int, int>> next;
            for (size_t r = 0; r < feats[k].pairs.size(); ++r) {
                const auto [i, j] = feats[k].pairs[r];
                const double v = stage.score(feats[k].X.row(static_cast<Eigen::Index>(r)));
                score(i, j) = v;
                score(j, i) = v;
                if (v >= cfg.features.prune_threshold) next.push_back({i, j});
            }
            prev[k] = std::move(score);
            active[k] = std::move(next);
        }
        model.stages.push_back(std::move(stage));
    }
    return model;
}

PosteriorDetail infer_posterior_detail(const CascadeModel& model, const Dataset& data) {
    validate(data);
    if (model.stages.empty()) throw std::invalid_argument("infer_posterior: model has no stages");
    for (size_t s = 0; s < model.stages.size(); ++s) {
        const CascadeStage& st = model.stages[s];
        if (!st.constant && st.gbdt.n_features != feature_length(static_cast<int>(s)))
            throw std::invalid_argument("infer_posterior: feature schema mismatch");
    }
    const int d = data.d();
    Eigen::MatrixXd cov = covariance_matrix(data.X);
    PosteriorDetail out;
    Eigen::MatrixXd score = Eigen::MatrixXd::Zero(d, d);
    std::vector<std::pair<int, int>> active = all_pairs(d);
    Eigen::MatrixXd prev;

    for (size_t s = 0; s < model.stages.size(); ++s) {
        StageFeatures sf =
            extract_pair_features(cov, data.n(), data.names, static_cast<int>(s),
                                  s == 0 ? nullptr : &prev, active, model.cfg.features);
        std::vector<std::pair<int, int>> next;
        for (size_t r = 0; r < sf.pairs.size(); ++r) {
            const auto [i, j] = sf.pairs[r];
            const double v = model.stages[s].score(sf.X.row(static_cast<Eigen::Index>(r)));
            score(i, j) = v;
            score(j, i) = v;
            if (v >= model.cfg.features.prune_threshold) next.push_back({i, j});
        }
        out.stage_scores.push_back(score);
        active = std::move(next);
        prev = score;
    }
    out.posterior = score;
    return out;
}

Eigen::MatrixXd infer_posterior(const CascadeModel& model, const Dataset& data) {
    return infer_posterior_detail(model, data).posterior;
}

Eigen::MatrixXi posterior_skeleton(const Eigen::MatrixXd& posterior, double threshold) {
    const int d = static_cast<int>(posterior.rows());
    Eigen::MatrixXi s = Eigen::MatrixXi::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && posterior(i, j) >= threshold) s(i, j) = 1;
    return s;
}

std::vector<CorpusEntry> bootstrap_dynamic_corpus(const Dataset& data, int replicas,
                                                  double subsample_fraction,
                                                  std::uint64_t seed,
                                                  const FciConfig& fci_cfg) {
    validate(data);
    if (replicas < 1) throw std::invalid_argument("bootstrap_dynamic_corpus: replicas must be >= 1");
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
        throw std::invalid_argument("bootstrap_dynamic_corpus: fraction must be in (0, 1]");

    std::vector<CorpusEntry> slots(static_cast<size_t>(replicas));
    std::vector<char> ok(static_cast<size_t>(replicas), 0);
    std::vector<std::string> warnings(static_cast<size_t>(replicas));

    parallel_for(replicas, [&](std::ptrdiff_t r) {
        Rng rng = derive_rng(seed, static_cast<std::uint64_t>(r));
        try {
            Dataset sub = subsample_rows(data, subsample_fraction, rng);
            FciResult fr = fci_learn(sub, fci_cfg);
            RicfResult rf = ricf_fit(data, fr.mag);
            Dataset regen = sample_dataset(rf.params, data.n(), rng);
            regen.names = data.names;
            slots[static_cast<size_t>(r)] =
                CorpusEntry{std::move(regen), skeleton_of(fr.mag),
                            "replica-" + std::to_string(r)};
            ok[static_cast<size_t>(r)] = 1;
        } catch (const std::exception& e) {
            warnings[static_cast<size_t>(r)] = e.what();
        }
    });

    std::vector<CorpusEntry> out;
    for (int r = 0; r < replicas; ++r) {
        if (ok[static_cast<size_t>(r)])
            out.push_back(std::move(slots[static_cast<size_t>(r)]));
        else
            std::cerr << "warning: bootstrap replica " << r << " skipped: "
                      << warnings[static_cast<size_t>(r)] << "\n";
    }
    return out;
}

namespace {

// Final-stage-style features plus the static model's first-stage and final
// scores; the adaptation head's input schema.
Eigen::MatrixXd adapt_features(const CascadeModel& model, const Dataset& data,
                               const std::vector<std::pair<int, int>>& pairs) {
    if (model.stages.size() < 2)
        throw std::invalid_argument("adapt_model: static model needs >= 2 stages");
    const int last = static_cast<int>(model.stages.size()) - 1;
    PosteriorDetail det = infer_posterior_detail(model, data);
    Eigen::MatrixXd cov = covariance_matrix(data.X);
    StageFeatures sf =
        extract_pair_features(cov, data.n(), data.names, last,
                              &det.stage_scores[static_cast<size_t>(last - 1)], pairs,
                              model.cfg.features);
    Eigen::MatrixXd X(sf.X.rows(), sf.X.cols() + 2);
    X.leftCols(sf.X.cols()) = sf.X;
    for (Eigen::Index r = 0; r < sf.X.rows(); ++r) {
        const auto [i, j] = pairs[static_cast<size_t>(r)];
        X(r, sf.X.cols()) = det.stage_scores[0](i, j);
        X(r, sf.X.cols() + 1) = det.posterior(i, j);
    }
    return X;
}

}  // namespace

AdaptedModel adapt_model(const CascadeModel& model, const std::vector<CorpusEntry>& dynamic_corpus,
                         const AdaptConfig& cfg) {
    if (dynamic_corpus.empty()) throw std::invalid_argument("adapt_model: empty dynamic corpus");
    for (const CorpusEntry& e : dynamic_corpus) check_entry(e);

    const size_t nds = dynamic_corpus.size();
    std::vector<bool> is_calib(nds);
    for (size_t k = 0; k < nds; ++k)
        is_calib[k] = cfg.calib_stride > 0 && (k % static_cast<size_t>(cfg.calib_stride)) == static_cast<size_t>(cfg.calib_stride) - 1;
    if (std::none_of(is_calib.begin(), is_calib.end(), [](bool b) { return b; }) ||
        std::all_of(is_calib.begin(), is_calib.end(), [](bool b) { return b; }))
        std::fill(is_calib.begin(), is_calib.end(), false);

    std::vector<Eigen::MatrixXd> xs(nds);
    std::vector<std::vector<std::pair<int, int>>> prs(nds);
    long n_train = 0, n_calib = 0;
    for (size_t k = 0; k < nds; ++k) {
        prs[k] = all_pairs(dynamic_corpus[k].data.d());
        xs[k] = adapt_features(model, dynamic_corpus[k].data, prs[k]);
        (is_calib[k] ? n_calib : n_train) += static_cast<long>(prs[k].size());
    }
    const Eigen::Index len = xs[0].cols();
    Eigen::MatrixXd Xt(n_train, len), Xc(n_calib, len);
    Eigen::VectorXd yt(n_train), yc(n_calib);
    long rt = 0, rc = 0;
    for (size_t k = 0; k < nds; ++k)
        for (size_t r = 0; r < prs[k].size(); ++r) {
            const auto [i, j] = prs[k][r];
            const double y = dynamic_corpus[k].skeleton(i, j);
            if (is_calib[k]) {
                Xc.row(rc) = xs[k].row(static_cast<Eigen::Index>(r));
                yc(rc++) = y;
            } else {
                Xt.row(rt) = xs[k].row(static_cast<Eigen::Index>(r));
                yt(rt++) = y;
            }
        }

    HeadFit head = fit_head(Xt, yt, Xc, yc, cfg.gbdt, cfg.label_smoothing, "adaptation head");
    AdaptedModel out;
    out.base = model;
    out.gbdt = std::move(head.gbdt);
    out.calib = std::move(head.calib);
    out.constant = head.constant;
    out.constant_value = head.constant_value;
    return out;
}

Eigen::MatrixXd infer_posterior(const AdaptedModel& model, const Dataset& data) {
    validate(data);
    const int d = data.d();
    const std::vector<std::pair<int, int>> pairs = all_pairs(d);
    Eigen::MatrixXd post = Eigen::MatrixXd::Zero(d, d);
    if (model.constant) {
        for (const auto& [i, j] : pairs) {
            post(i, j) = model.constant_value;
            post(j, i) = model.constant_value;
        }
        return post;
    }
    Eigen::MatrixXd X = adapt_features(model.base, data, pairs);
    for (size_t r = 0; r < pairs.size(); ++r) {
        const auto [i, j] = pairs[r];
        const double v =
            model.calib.apply(model.gbdt.predict_proba(X.row(static_cast<Eigen::Index>(r))));
        post(i, j) = v;
        post(j, i) = v;
    }
    return post;
}

Eigen::MatrixXd fci_star_posterior(const Dataset& data, int replicas, double subsample_fraction,
                                   std::uint64_t seed, const FciConfig& cfg) {
    validate(data);
    if (replicas < 1) throw std::invalid_argument("fci_star_posterior: replicas must be >= 1");
    const int d = data.d();
    std::vector<Eigen::MatrixXi> skels(static_cast<size_t>(replicas));
    std::vector<char> ok(static_cast<size_t>(replicas), 0);
    std::vector<std::string> warnings(static_cast<size_t>(replicas));

    parallel_for(replicas, [&](std::ptrdiff_t r) {
        Rng rng = derive_rng(seed, static_cast<std::uint64_t>(r));
        try {
            Dataset sub = subsample_rows(data, subsample_fraction, rng);
            FciResult fr = fci_learn(sub, cfg);
            skels[static_cast<size_t>(r)] = skeleton_of(fr.mag);
            ok[static_cast<size_t>(r)] = 1;
        } catch (const std::exception& e) {
            warnings[static_cast<size_t>(r)] = e.what();
        }
    });

    Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(d, d);
    int valid = 0;
    for (int r = 0; r < replicas; ++r) {
        if (ok[static_cast<size_t>(r)]) {
            freq += skels[static_cast<size_t>(r)].cast<double>();
            ++valid;
        } else {
            std::cerr << "warning: fci* replica " << r << " skipped: "
                      << warnings[static_cast<size_t>(r)] << "\n";
        }
    }
    if (valid == 0) throw std::runtime_error("fci_star_posterior: every replica failed");
    freq /= static_cast<double>(valid);
    return freq;
}

}  // namespace spotcd
