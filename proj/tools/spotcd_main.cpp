#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spotcd/abic.hpp"
#include "spotcd/cascade.hpp"
#include "spotcd/fci.hpp"
#include "spotcd/graph.hpp"
#include "spotcd/io.hpp"
#include "spotcd/metrics.hpp"
#include "spotcd/parallel.hpp"
#include "spotcd/scm.hpp"
#include "spotcd/spot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spotcd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitTimeout = 4;

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

[[noreturn]] void config_error(const std::string& msg) { throw std::runtime_error(msg); }

std::pair<int, int> parse_range(const std::string& spec) {
    auto pos = spec.find("..");
    auto to_int = [&](const std::string& s) {
        int v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            config_error("bad integer in range '" + spec + "'");
        return v;
    };
    std::pair<int, int> r;
    if (pos == std::string::npos) {
        r.first = r.second = to_int(spec);
    } else {
        r.first = to_int(spec.substr(0, pos));
        r.second = to_int(spec.substr(pos + 2));
    }
    if (r.first < 1 || r.second < r.first) config_error("bad range '" + spec + "'");
    return r;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        size_t pos = s.find(',', start);
        if (pos == std::string::npos) {
            if (start < s.size()) out.push_back(s.substr(start));
            break;
        }
        if (pos > start) out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

Topology parse_topology(const std::string& s) {
    if (s == "er") return Topology::Er;
    if (s == "sf") return Topology::ScaleFree;
    config_error("unknown topology '" + s + "' (expected er or sf)");
}

// Config file: flat JSON keyed by long option names (without leading dashes).
// Precedence is CLI flag > config file > built-in default, achieved by
// loading file values as option defaults before parsing.
json load_file_config(int argc, char** argv) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    }
    if (path.empty()) return json::object();
    json j = read_json(path);
    if (!j.is_object()) config_error("config file must hold a JSON object");
    return j;
}

template <class T>
void cfg_default(const json& fcfg, const std::string& key, T& v) {
    if (fcfg.contains(key)) v = fcfg.at(key).get<T>();
}

std::string item_name(const char* stem, int k, int count, const char* ext) {
    size_t width = 3;
    for (int c = count; c > 1000; c /= 10) ++width;
    std::string digits = std::to_string(k);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return std::string(stem) + "_" + digits + "." + ext;
}

std::string resolve_model_path(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* dir = std::getenv("SPOTCD_MODEL_DIR"))
        return (fs::path(dir) / "model.json").string();
    config_error("no model given: pass --model or set SPOTCD_MODEL_DIR");
}

Pag truth_pag_of(const Admg& truth) {
    return mag_to_pag(maximal_ancestral_projection(truth));
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string out;
    std::string d_spec = "20..50";
    int n = 1000;
    int count = 10;
    std::uint64_t seed = 0;
    std::string topology = "er";
    int jobs = 0;
};

int cmd_simulate(const SimulateOpts& o) {
    CorpusConfig cc;
    cc.count = o.count;
    cc.d_range = parse_range(o.d_spec);
    cc.n = o.n;
    cc.seed = o.seed;
    cc.graph.topology = parse_topology(o.topology);
    if (o.count < 0) config_error("--count must be >= 0");
    if (o.n < 1) config_error("--n must be >= 1");
    set_threads(o.jobs);

    fs::create_directories(o.out);
    auto items = generate_corpus(cc);

    json manifest_items = json::array();
    for (int k = 0; k < static_cast<int>(items.size()); ++k) {
        std::string data_name = item_name("data", k, cc.count, "csv");
        std::string graph_name = item_name("graph", k, cc.count, "json");
        write_dataset_csv((fs::path(o.out) / data_name).string(), items[k].data);
        write_json((fs::path(o.out) / graph_name).string(), graph_to_json(items[k].graph));
        manifest_items.push_back(
            {{"dataset", data_name}, {"graph", graph_name}, {"seed", items[k].seed}});
    }
    json resolved{{"d", o.d_spec},       {"n", o.n},   {"count", o.count},
                  {"seed", o.seed},      {"topology", o.topology}};
    write_json((fs::path(o.out) / "manifest.json").string(),
               json{{"command", "simulate"}, {"config", resolved}, {"items", manifest_items}});
    return kExitOk;
}

// ---------------------------------------------------------- train-posterior

struct TrainOpts {
    std::string corpus;  // manifest path; generated internally when empty
    std::string out;
    std::string report;
    int count = 200;
    std::string d_spec = "20..50";
    int n = 1000;
    std::uint64_t seed = 0;
    int stages = 3;
    int holdout_stride = 10;  // every k-th item held out; 0 disables
    int jobs = 0;
};

std::vector<CorpusEntry> load_corpus_manifest(const std::string& manifest_path) {
    json m = read_json(manifest_path);
    fs::path base = fs::path(manifest_path).parent_path();
    std::vector<CorpusEntry> entries;
    for (const json& it : m.at("items")) {
        CorpusEntry e;
        std::string data_rel = it.at("dataset").get<std::string>();
        e.data = read_dataset_csv((base / data_rel).string());
        Admg g = graph_from_json(read_json((base / it.at("graph").get<std::string>()).string()));
        e.skeleton = skeleton_of(g);
        e.id = data_rel;
        entries.push_back(std::move(e));
    }
    return entries;
}

int cmd_train_posterior(const TrainOpts& o) {
    set_threads(o.jobs);
    std::vector<CorpusEntry> entries;
    if (!o.corpus.empty()) {
        entries = load_corpus_manifest(o.corpus);
    } else {
        CorpusConfig cc;
        cc.count = o.count;
        cc.d_range = parse_range(o.d_spec);
        cc.n = o.n;
        cc.seed = o.seed;
        entries = corpus_entries(generate_corpus(cc));
    }
    if (entries.empty()) config_error("empty corpus");

    std::vector<CorpusEntry> train, held;
    for (size_t k = 0; k < entries.size(); ++k) {
        if (o.holdout_stride > 0 &&
            k % static_cast<size_t>(o.holdout_stride) == static_cast<size_t>(o.holdout_stride) - 1)
            held.push_back(entries[k]);
        else
            train.push_back(entries[k]);
    }
    if (train.empty()) config_error("holdout stride leaves no training items");

    CascadeConfig ccfg;
    ccfg.stages = o.stages;
    ccfg.seed = o.seed;
    CascadeModel model = train_cascade(train, ccfg);
    write_json(o.out, model_to_json(model));

    json per_item = json::array();
    double sum_auroc = 0, sum_auprc = 0, sum_kl = 0;
    int defined = 0;
    for (const CorpusEntry& e : held) {
        Eigen::MatrixXd post = infer_posterior(model, e.data);
        PosteriorQuality q = posterior_quality(post, e.skeleton);
        per_item.push_back({{"id", e.id},
                            {"auroc", q.auroc},
                            {"auprc", q.auprc},
                            {"kl", q.kl},
                            {"defined", q.defined}});
        if (q.defined) {
            sum_auroc += q.auroc;
            sum_auprc += q.auprc;
            sum_kl += q.kl;
            ++defined;
        }
    }
    json resolved{{"corpus", o.corpus},   {"count", o.count}, {"d", o.d_spec},
                  {"n", o.n},             {"seed", o.seed},   {"stages", o.stages},
                  {"holdout-stride", o.holdout_stride}};
    json report{{"command", "train-posterior"},
                {"config", resolved},
                {"model", o.out},
                {"trained_on", train.size()},
                {"held_out", held.size()},
                {"auroc", defined ? sum_auroc / defined : 0.0},
                {"auprc", defined ? sum_auprc / defined : 0.0},
                {"kl", defined ? sum_kl / defined : 0.0},
                {"defined_items", defined},
                {"per_item", per_item}};
    std::string report_path = o.report.empty() ? o.out + ".report.json" : o.report;
    write_json(report_path, report);
    std::cout << "model written to " << o.out << " (held-out auroc "
              << fmt(defined ? sum_auroc / defined : 0.0) << ", kl "
              << fmt(defined ? sum_kl / defined : 0.0) << ")\n";
    return kExitOk;
}

// ----------------------------------------------------------------- posterior

struct PosteriorOpts {
    std::string model;
    std::string data;
    std::string out;
    bool dynamic_adapt = false;
    int replicas = 20;
    double subsample = 0.7;
    std::uint64_t seed = 0;
    double alpha = 0.01;
    int max_cond_size = 4;
    bool possible_dsep = true;
    int jobs = 0;
};

int cmd_posterior(const PosteriorOpts& o) {
    set_threads(o.jobs);
    std::string model_path = resolve_model_path(o.model);
    CascadeModel model = model_from_json(read_json(model_path));
    Dataset data = read_dataset_csv(o.data);
    Eigen::MatrixXd post;
    if (o.dynamic_adapt) {
        FciConfig fc{o.alpha, o.max_cond_size, o.possible_dsep};
        auto corpus = bootstrap_dynamic_corpus(data, o.replicas, o.subsample, o.seed, fc);
        AdaptedModel adapted = adapt_model(model, corpus);
        post = infer_posterior(adapted, data);
    } else {
        post = infer_posterior(model, data);
    }
    write_matrix_csv(o.out, post);
    json resolved{{"model", model_path},       {"data", o.data},
                  {"dynamic-adapt", o.dynamic_adapt}, {"replicas", o.replicas},
                  {"subsample", o.subsample},  {"seed", o.seed},
                  {"alpha", o.alpha},          {"max-cond-size", o.max_cond_size},
                  {"possible-dsep", o.possible_dsep}};
    write_json(o.out + ".manifest.json",
               json{{"command", "posterior"}, {"config", resolved}, {"posterior", o.out}});
    return kExitOk;
}

// --------------------------------------------------------------------- learn

struct LearnOpts {
    std::string data;
    std::string method;  // abic | spot | fci
    std::string out;
    double lambda = 0.05;
    double omega = 0.05;
    int alm_steps = 20;
    int inner_steps = 10;
    double timeout = 0.0;
    double alpha = 0.01;
    int max_cond_size = 4;
    bool possible_dsep = true;
    std::string posterior;  // csv; inferred from --model when empty (spot)
    std::string model;
    double guide_c = 0.1;
    bool no_sparsity_prior = false;
    std::string true_skeleton;  // graph json
    std::uint64_t seed = 0;
    int jobs = 0;
};

int cmd_learn(const LearnOpts& o) {
    set_threads(o.jobs);
    if (o.method != "abic" && o.method != "spot" && o.method != "fci")
        config_error("unknown method '" + o.method + "' (expected abic, spot or fci)");
    Dataset data = read_dataset_csv(o.data);
    fs::create_directories(o.out);
    fs::path out(o.out);

    Eigen::MatrixXi skel;
    bool have_skel = false;
    if (!o.true_skeleton.empty()) {
        if (o.method == "fci") config_error("--true-skeleton requires abic or spot");
        Admg g = graph_from_json(read_json(o.true_skeleton));
        if (g.d != data.d()) config_error("--true-skeleton dimension mismatch");
        skel = skeleton_of(g);
        have_skel = true;
    }
    if (!o.posterior.empty() && o.method != "spot")
        config_error("--posterior requires method spot");

    json resolved{{"data", o.data},
                  {"method", o.method},
                  {"lambda", o.lambda},
                  {"omega", o.omega},
                  {"alm-steps", o.alm_steps},
                  {"inner-steps", o.inner_steps},
                  {"timeout", o.timeout},
                  {"alpha", o.alpha},
                  {"max-cond-size", o.max_cond_size},
                  {"possible-dsep", o.possible_dsep},
                  {"guide-c", o.guide_c},
                  {"no-sparsity-prior", o.no_sparsity_prior},
                  {"true-skeleton", o.true_skeleton},
                  {"seed", o.seed}};

    if (o.method == "fci") {
        FciConfig fc{o.alpha, o.max_cond_size, o.possible_dsep};
        FciResult res = fci_learn(data, fc);
        write_json((out / "mag.json").string(), graph_to_json(res.mag));
        write_json((out / "pag.json").string(), pag_to_json(res.pag));
        write_trace_jsonl((out / "trace.jsonl").string(), {});
        write_json((out / "manifest.json").string(),
                   json{{"command", "learn"},
                        {"config", resolved},
                        {"status", "Converged"},
                        {"ci_tests", res.ci_tests}});
        return kExitOk;
    }

    AbicConfig acfg;
    acfg.lambda = o.lambda;
    acfg.omega = o.omega;
    acfg.alm_steps = o.alm_steps;
    acfg.inner_steps = o.inner_steps;
    acfg.deadline_seconds = o.timeout;

    FitResult fit;
    std::string posterior_used;
    if (o.method == "abic") {
        fit = abic_fit(data, acfg, nullptr, have_skel ? &skel : nullptr);
    } else {
        Eigen::MatrixXd post;
        if (!o.posterior.empty()) {
            post = read_matrix_csv(o.posterior);
            posterior_used = o.posterior;
        } else {
            std::string model_path = resolve_model_path(o.model);
            CascadeModel model = model_from_json(read_json(model_path));
            post = infer_posterior(model, data);
            posterior_used = (out / "posterior.csv").string();
            write_matrix_csv(posterior_used, post);
        }
        SpotConfig scfg;
        scfg.abic = acfg;
        scfg.guide_c = o.guide_c;
        scfg.sparsity_unconditional = !o.no_sparsity_prior;
        scfg.seed = o.seed;
        fit = spot_fit(data, post, scfg, have_skel ? &skel : nullptr);
    }

    write_json((out / "mag.json").string(), graph_to_json(fit.graph));
    write_json((out / "pag.json").string(), pag_to_json(pag_of_admg_marks(fit.graph)));
    write_trace_jsonl((out / "trace.jsonl").string(), fit.trace);
    resolved["posterior"] = posterior_used;
    write_json((out / "manifest.json").string(),
               json{{"command", "learn"},
                    {"config", resolved},
                    {"status", to_string(fit.status)},
                    {"final_f", fit.final_f},
                    {"final_h", fit.final_h},
                    {"omega_used", fit.omega_used}});
    if (fit.status == FitStatus::Diverged) {
        std::cerr << "learner diverged; partial outputs written to " << o.out << "\n";
        return kExitDiverged;
    }
    if (fit.status == FitStatus::Timeout) {
        std::cerr << "deadline hit; best-so-far outputs written to " << o.out << "\n";
        return kExitTimeout;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------- eval

struct EvalOpts {
    std::string truth;  // ADMG json
    std::string pred_mag;
    std::string pred_pag;
    std::string posterior;
    std::string out;
};

void put_prf(json& j, const std::string& famname, const PrfStats& s) {
    j[famname + "_f1"] = s.f1;
    j[famname + "_tpr"] = s.tpr;
    j[famname + "_fdr"] = s.fdr;
}

int cmd_eval(const EvalOpts& o) {
    Admg truth = graph_from_json(read_json(o.truth));
    json out{{"truth", o.truth}};
    bool any = false;
    if (!o.pred_mag.empty() && !o.pred_pag.empty())
        config_error("pass only one of --pred-mag / --pred-pag");
    if (!o.pred_mag.empty() || !o.pred_pag.empty()) {
        Pag pred = o.pred_mag.empty()
                       ? pag_from_json(read_json(o.pred_pag))
                       : pag_of_admg_marks(graph_from_json(read_json(o.pred_mag)));
        if (pred.d != truth.d) config_error("prediction/truth dimension mismatch");
        Pag tp = truth_pag_of(truth);
        PagMetrics pm = pag_metrics(pred, tp);
        put_prf(out, "skeleton", pm.skeleton);
        put_prf(out, "arrowhead", pm.arrowhead);
        put_prf(out, "tail", pm.tail);
        out["shd"] = shd(pred, tp);
        any = true;
    }
    if (!o.posterior.empty()) {
        Eigen::MatrixXd post = read_matrix_csv(o.posterior);
        if (post.rows() != truth.d || post.cols() != truth.d)
            config_error("posterior/truth dimension mismatch");
        PosteriorQuality q = posterior_quality(post, skeleton_of(truth));
        out["auroc"] = q.auroc;
        out["auprc"] = q.auprc;
        out["kl"] = q.kl;
        out["posterior_defined"] = q.defined;
        any = true;
    }
    if (!any) config_error("nothing to evaluate: pass --pred-mag, --pred-pag or --posterior");
    write_json(o.out, out);
    return kExitOk;
}

// --------------------------------------------------------------------- bench

struct BenchOpts {
    std::string out;
    std::string d_list = "20,30,50";
    int seeds = 5;
    int n = 1000;
    std::string methods = "fci,abic,spot";
    std::uint64_t seed = 0;
    std::string model;  // trained on an internal static corpus when empty
    int train_count = 100;
    double lambda = 0.05;
    double omega = 0.05;
    double alpha = 0.01;
    int max_cond_size = 4;
    double guide_c = 0.1;
    double timeout = 0.0;  // per run
    int jobs = 0;
};

struct BenchRow {
    std::string method;
    int d = 0;
    int seed_index = 0;
    std::string status;
    double runtime = 0.0;
    double sk_f1 = 0.0, arr_f1 = 0.0, tail_f1 = 0.0;
    int shd_v = 0;
};

struct MeanStd {
    double mean = 0.0, std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
    MeanStd ms;
    if (v.empty()) return ms;
    for (double x : v) ms.mean += x;
    ms.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - ms.mean) * (x - ms.mean);
        ms.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return ms;
}

int cmd_bench(const BenchOpts& o) {
    set_threads(o.jobs);
    std::vector<int> ds;
    for (const auto& tok : split_list(o.d_list)) ds.push_back(parse_range(tok).first);
    if (ds.empty()) config_error("--d list is empty");
    std::vector<std::string> methods = split_list(o.methods);
    if (methods.empty()) config_error("--methods list is empty");
    for (const auto& m : methods)
        if (m != "fci" && m != "abic" && m != "spot")
            config_error("unknown method '" + m + "' in --methods");
    if (o.seeds < 1) config_error("--seeds must be >= 1");
    fs::create_directories(o.out);

    bool want_spot = false;
    for (const auto& m : methods) want_spot |= (m == "spot");

    CascadeModel model;
    std::string model_path = o.model;
    if (want_spot) {
        if (!model_path.empty()) {
            model = model_from_json(read_json(model_path));
        } else {
            int dmin = *std::min_element(ds.begin(), ds.end());
            int dmax = *std::max_element(ds.begin(), ds.end());
            CorpusConfig cc;
            cc.count = o.train_count;
            cc.d_range = {dmin, dmax};
            cc.n = o.n;
            cc.seed = o.seed + 1000;
            CascadeConfig ccfg;
            ccfg.seed = o.seed + 1000;
            model = train_cascade(corpus_entries(generate_corpus(cc)), ccfg);
            model_path = (fs::path(o.out) / "model.json").string();
            write_json(model_path, model_to_json(model));
        }
    }

    // One dataset per (d, seed index); truth PAG and spot posterior cached.
    struct Case {
        int d = 0, k = 0;
        Dataset data;
        Pag truth;
        Eigen::MatrixXd posterior;
    };
    std::vector<Case> cases;
    for (int d : ds)
        for (int k = 0; k < o.seeds; ++k) {
            Case c;
            c.d = d;
            c.k = k;
            Rng rng(mix_two(o.seed, static_cast<std::uint64_t>(d) * 1000 + k));
            GraphSamplerConfig gc;
            gc.d = d;
            Admg g = sample_admg(gc, rng);
            ScmParams params = parameterize_scm(g, WeightRanges{}, rng);
            c.data = sample_dataset(params, o.n, rng);
            c.truth = truth_pag_of(g);
            if (want_spot) c.posterior = infer_posterior(model, c.data);
            cases.push_back(std::move(c));
        }

    std::vector<BenchRow> rows(methods.size() * cases.size());
    parallel_for(static_cast<std::int64_t>(rows.size()), [&](std::int64_t r) {
        const std::string& method = methods[static_cast<size_t>(r) / cases.size()];
        const Case& c = cases[static_cast<size_t>(r) % cases.size()];
        BenchRow row;
        row.method = method;
        row.d = c.d;
        row.seed_index = c.k;
        auto t0 = std::chrono::steady_clock::now();
        Pag pred;
        if (method == "fci") {
            FciConfig fc{o.alpha, o.max_cond_size, true};
            pred = fci_learn(c.data, fc).pag;
            row.status = "Converged";
        } else {
            AbicConfig acfg;
            acfg.lambda = o.lambda;
            acfg.omega = o.omega;
            acfg.deadline_seconds = o.timeout;
            FitResult fit;
            if (method == "abic") {
                fit = abic_fit(c.data, acfg);
            } else {
                SpotConfig scfg;
                scfg.abic = acfg;
                scfg.guide_c = o.guide_c;
                scfg.seed = o.seed;
                fit = spot_fit(c.data, c.posterior, scfg);
            }
            pred = pag_of_admg_marks(fit.graph);
            row.status = to_string(fit.status);
        }
        row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        PagMetrics pm = pag_metrics(pred, c.truth);
        row.sk_f1 = pm.skeleton.f1;
        row.arr_f1 = pm.arrowhead.f1;
        row.tail_f1 = pm.tail.f1;
        row.shd_v = shd(pred, c.truth);
        rows[static_cast<size_t>(r)] = std::move(row);
    });

    std::ofstream runs((fs::path(o.out) / "runs.csv").string());
    runs << "method,d,seed,status,runtime_s,skeleton_f1,arrowhead_f1,tail_f1,shd\n";
    for (const BenchRow& r : rows)
        runs << r.method << ',' << r.d << ',' << r.seed_index << ',' << r.status << ','
             << fmt(r.runtime) << ',' << fmt(r.sk_f1) << ',' << fmt(r.arr_f1) << ','
             << fmt(r.tail_f1) << ',' << r.shd_v << '\n';
    runs.close();

    std::ofstream agg((fs::path(o.out) / "bench.csv").string());
    agg << "method,d,runs,skeleton_f1_mean,skeleton_f1_std,arrowhead_f1_mean,arrowhead_f1_std,"
           "tail_f1_mean,tail_f1_std,shd_mean,shd_std,runtime_s_mean,runtime_s_std\n";
    std::ofstream plot((fs::path(o.out) / "plot_f1.csv").string());
    plot << "d,method,skeleton_f1,arrowhead_f1,tail_f1\n";
    for (const auto& method : methods)
        for (int d : ds) {
            std::vector<double> sk, arr, tl, sh, rt;
            for (const BenchRow& r : rows)
                if (r.method == method && r.d == d) {
                    sk.push_back(r.sk_f1);
                    arr.push_back(r.arr_f1);
                    tl.push_back(r.tail_f1);
                    sh.push_back(r.shd_v);
                    rt.push_back(r.runtime);
                }
            MeanStd msk = mean_std(sk), marr = mean_std(arr), mtl = mean_std(tl),
                    msh = mean_std(sh), mrt = mean_std(rt);
            agg << method << ',' << d << ',' << sk.size() << ',' << fmt(msk.mean) << ','
                << fmt(msk.std) << ',' << fmt(marr.mean) << ',' << fmt(marr.std) << ','
                << fmt(mtl.mean) << ',' << fmt(mtl.std) << ',' << fmt(msh.mean) << ','
                << fmt(msh.std) << ',' << fmt(mrt.mean) << ',' << fmt(mrt.std) << '\n';
            plot << d << ',' << method << ',' << fmt(msk.mean) << ',' << fmt(marr.mean) << ','
                 << fmt(mtl.mean) << '\n';
        }
    agg.close();
    plot.close();

    json resolved{{"d", o.d_list},     {"seeds", o.seeds},
                  {"n", o.n},          {"methods", o.methods},
                  {"seed", o.seed},    {"model", model_path},
                  {"train-count", o.train_count}, {"lambda", o.lambda},
                  {"omega", o.omega},  {"alpha", o.alpha},
                  {"max-cond-size", o.max_cond_size}, {"guide-c", o.guide_c},
                  {"timeout", o.timeout}};
    write_json((fs::path(o.out) / "manifest.json").string(),
               json{{"command", "bench"},
                    {"config", resolved},
                    {"outputs", {"runs.csv", "bench.csv", "plot_f1.csv"}}});
    std::cout << "bench results in " << o.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spotcd: causal discovery with latent confounders"};
    app.require_subcommand(1);

    json fcfg;
    try {
        fcfg = load_file_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::string config_path;

    SimulateOpts so;
    cfg_default(fcfg, "d", so.d_spec);
    cfg_default(fcfg, "n", so.n);
    cfg_default(fcfg, "count", so.count);
    cfg_default(fcfg, "seed", so.seed);
    cfg_default(fcfg, "topology", so.topology);
    cfg_default(fcfg, "jobs", so.jobs);
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset/graph suite");
    sim->add_option("--out", so.out, "Output directory")->required();
    sim->add_option("--d", so.d_spec, "Node count or range, e.g. 30 or 50..100");
    sim->add_option("--n", so.n, "Samples per dataset");
    sim->add_option("--count", so.count, "Number of dataset/graph pairs");
    sim->add_option("--seed", so.seed, "Base seed");
    sim->add_option("--topology", so.topology, "er or sf");
    sim->add_option("--jobs", so.jobs, "Worker threads (0 = hardware)");
    sim->add_option("--config", config_path, "JSON config file");

    TrainOpts to;
    cfg_default(fcfg, "count", to.count);
    cfg_default(fcfg, "d", to.d_spec);
    cfg_default(fcfg, "n", to.n);
    cfg_default(fcfg, "seed", to.seed);
    cfg_default(fcfg, "stages", to.stages);
    cfg_default(fcfg, "holdout-stride", to.holdout_stride);
    cfg_default(fcfg, "jobs", to.jobs);
    auto* tr = app.add_subcommand("train-posterior", "Train the skeleton-posterior cascade");
    tr->add_option("--corpus", to.corpus, "Corpus manifest (generated internally when absent)");
    tr->add_option("--out", to.out, "Model output path")->required();
    tr->add_option("--report", to.report, "Held-out report path (default <out>.report.json)");
    tr->add_option("--count", to.count, "Corpus size when generating internally");
    tr->add_option("--d", to.d_spec, "Node-count range for the internal corpus");
    tr->add_option("--n", to.n, "Samples per dataset for the internal corpus");
    tr->add_option("--seed", to.seed, "Corpus/training seed");
    tr->add_option("--stages", to.stages, "Cascade stages");
    tr->add_option("--holdout-stride", to.holdout_stride,
                   "Hold out every k-th item for the report (0 = none)");
    tr->add_option("--jobs", to.jobs, "Worker threads (0 = hardware)");
    tr->add_option("--config", config_path, "JSON config file");

    PosteriorOpts po;
    cfg_default(fcfg, "model", po.model);
    cfg_default(fcfg, "replicas", po.replicas);
    cfg_default(fcfg, "subsample", po.subsample);
    cfg_default(fcfg, "seed", po.seed);
    cfg_default(fcfg, "alpha", po.alpha);
    cfg_default(fcfg, "max-cond-size", po.max_cond_size);
    cfg_default(fcfg, "possible-dsep", po.possible_dsep);
    cfg_default(fcfg, "jobs", po.jobs);
    auto* pos = app.add_subcommand("posterior", "Skeleton-posterior inference on a dataset");
    pos->add_option("--model", po.model, "Model file ($SPOTCD_MODEL_DIR/model.json when unset)");
    pos->add_option("--data", po.data, "Dataset CSV")->required();
    pos->add_option("--out", po.out, "Posterior CSV output")->required();
    pos->add_flag("--dynamic-adapt", po.dynamic_adapt,
                  "Bootstrap a dynamic corpus and adapt the model first");
    pos->add_option("--replicas", po.replicas, "Bootstrap replicas for adaptation");
    pos->add_option("--subsample", po.subsample, "Bootstrap subsample fraction");
    pos->add_option("--seed", po.seed, "Bootstrap seed");
    pos->add_option("--alpha", po.alpha, "CI level for bootstrap FCI");
    pos->add_option("--max-cond-size", po.max_cond_size, "Bootstrap FCI conditioning cap");
    pos->add_flag("--possible-dsep,!--no-possible-dsep", po.possible_dsep,
                  "Possible-d-sep stage in bootstrap FCI");
    pos->add_option("--jobs", po.jobs, "Worker threads (0 = hardware)");
    pos->add_option("--config", config_path, "JSON config file");

    LearnOpts lo;
    cfg_default(fcfg, "lambda", lo.lambda);
    cfg_default(fcfg, "omega", lo.omega);
    cfg_default(fcfg, "alm-steps", lo.alm_steps);
    cfg_default(fcfg, "inner-steps", lo.inner_steps);
    cfg_default(fcfg, "timeout", lo.timeout);
    cfg_default(fcfg, "alpha", lo.alpha);
    cfg_default(fcfg, "max-cond-size", lo.max_cond_size);
    cfg_default(fcfg, "possible-dsep", lo.possible_dsep);
    cfg_default(fcfg, "model", lo.model);
    cfg_default(fcfg, "guide-c", lo.guide_c);
    cfg_default(fcfg, "no-sparsity-prior", lo.no_sparsity_prior);
    cfg_default(fcfg, "seed", lo.seed);
    cfg_default(fcfg, "jobs", lo.jobs);
    auto* ln = app.add_subcommand("learn", "Learn a MAG from a dataset");
    ln->add_option("--data", lo.data, "Dataset CSV")->required();
    ln->add_option("--method", lo.method, "abic, spot or fci")->required();
    ln->add_option("--out", lo.out, "Output directory")->required();
    ln->add_option("--lambda", lo.lambda, "L1 weight");
    ln->add_option("--omega", lo.omega, "Edge threshold");
    ln->add_option("--alm-steps", lo.alm_steps, "Outer augmented-Lagrangian steps");
    ln->add_option("--inner-steps", lo.inner_steps, "Pseudo-variable refreshes per outer step");
    ln->add_option("--timeout", lo.timeout,
                   "Deadline in seconds; best-so-far is written on expiry (0 = off)");
    ln->add_option("--alpha", lo.alpha, "CI level (fci)");
    ln->add_option("--max-cond-size", lo.max_cond_size, "Conditioning cap (fci)");
    ln->add_flag("--possible-dsep,!--no-possible-dsep", lo.possible_dsep,
                 "Possible-d-sep stage (fci)");
    ln->add_option("--posterior", lo.posterior, "Skeleton-posterior CSV (spot)");
    ln->add_option("--model", lo.model, "Cascade model for inline posterior inference (spot)");
    ln->add_option("--guide-c", lo.guide_c, "Guide exploration constant (spot)");
    ln->add_flag("--no-sparsity-prior", lo.no_sparsity_prior,
                 "Disable unconditional sparsifying acceptance (spot)");
    ln->add_option("--true-skeleton", lo.true_skeleton,
                   "Graph JSON whose skeleton constrains the fit (abic/spot)");
    ln->add_option("--seed", lo.seed, "Guide seed (spot)");
    ln->add_option("--jobs", lo.jobs, "Worker threads (0 = hardware)");
    ln->add_option("--config", config_path, "JSON config file");

    EvalOpts eo;
    auto* ev = app.add_subcommand("eval", "Score predictions against a ground-truth graph");
    ev->add_option("--truth", eo.truth, "Ground-truth graph JSON")->required();
    ev->add_option("--pred-mag", eo.pred_mag, "Predicted MAG JSON");
    ev->add_option("--pred-pag", eo.pred_pag, "Predicted PAG JSON");
    ev->add_option("--posterior", eo.posterior, "Skeleton-posterior CSV");
    ev->add_option("--out", eo.out, "Metrics JSON output")->required();
    ev->add_option("--config", config_path, "JSON config file");

    BenchOpts bo;
    cfg_default(fcfg, "d", bo.d_list);
    cfg_default(fcfg, "seeds", bo.seeds);
    cfg_default(fcfg, "n", bo.n);
    cfg_default(fcfg, "methods", bo.methods);
    cfg_default(fcfg, "seed", bo.seed);
    cfg_default(fcfg, "model", bo.model);
    cfg_default(fcfg, "train-count", bo.train_count);
    cfg_default(fcfg, "lambda", bo.lambda);
    cfg_default(fcfg, "omega", bo.omega);
    cfg_default(fcfg, "alpha", bo.alpha);
    cfg_default(fcfg, "max-cond-size", bo.max_cond_size);
    cfg_default(fcfg, "guide-c", bo.guide_c);
    cfg_default(fcfg, "timeout", bo.timeout);
    cfg_default(fcfg, "jobs", bo.jobs);
    auto* bn = app.add_subcommand("bench", "Run the learner comparison suite");
    bn->add_option("--out", bo.out, "Output directory")->required();
    bn->add_option("--d", bo.d_list, "Comma-separated node counts");
    bn->add_option("--seeds", bo.seeds, "Datasets per node count");
    bn->add_option("--n", bo.n, "Samples per dataset");
    bn->add_option("--methods", bo.methods, "Comma-separated subset of fci,abic,spot");
    bn->add_option("--seed", bo.seed, "Base seed");
    bn->add_option("--model", bo.model, "Cascade model for spot (trained internally when unset)");
    bn->add_option("--train-count", bo.train_count, "Internal training-corpus size");
    bn->add_option("--lambda", bo.lambda, "L1 weight");
    bn->add_option("--omega", bo.omega, "Edge threshold");
    bn->add_option("--alpha", bo.alpha, "CI level (fci)");
    bn->add_option("--max-cond-size", bo.max_cond_size, "Conditioning cap (fci)");
    bn->add_option("--guide-c", bo.guide_c, "Guide exploration constant (spot)");
    bn->add_option("--timeout", bo.timeout, "Per-run deadline in seconds (0 = off)");
    bn->add_option("--jobs", bo.jobs, "Worker threads (0 = hardware)");
    bn->add_option("--config", config_path, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(so);
        if (tr->parsed()) return cmd_train_posterior(to);
        if (pos->parsed()) return cmd_posterior(po);
        if (ln->parsed()) return cmd_learn(lo);
        if (ev->parsed()) return cmd_eval(eo);
        if (bn->parsed()) return cmd_bench(bo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
