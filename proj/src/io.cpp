#include "spotcd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace spotcd {
namespace {

using nlohmann::json;

// Shortest round-trip decimal form.
std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, const std::string& path, int line) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
    double v = 0.0;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e || b == e)
        throw std::runtime_error(path + ":" + std::to_string(line) +
                                 ": not a number: '" + cell + "'");
    return v;
}

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return in;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array()) throw std::runtime_error("matrix json: expected array of rows");
    int rows = static_cast<int>(j.size());
    int cols = rows == 0 ? 0 : static_cast<int>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j.at(i);
        if (static_cast<int>(row.size()) != cols)
            throw std::runtime_error("matrix json: ragged rows");
        for (int c = 0; c < cols; ++c) m(i, c) = row.at(c).get<double>();
    }
    return m;
}

// JSON has no literal for non-finite numbers; they serialize as null.
double number_or_nan(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

json gbdt_to_json(const GbdtModel& m) {
    json trees = json::array();
    for (const Tree& t : m.trees) {
        json nodes = json::array();
        for (const TreeNode& n : t.nodes)
            nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
        trees.push_back(std::move(nodes));
    }
    return json{{"config",
                 {{"n_trees", m.cfg.n_trees},
                  {"max_depth", m.cfg.max_depth},
                  {"learning_rate", m.cfg.learning_rate},
                  {"reg_lambda", m.cfg.reg_lambda},
                  {"min_leaf", m.cfg.min_leaf}}},
                {"n_features", m.n_features},
                {"base_score", m.base_score},
                {"trees", std::move(trees)}};
}

GbdtModel gbdt_from_json(const json& j) {
    GbdtModel m;
    const json& c = j.at("config");
    m.cfg.n_trees = c.at("n_trees").get<int>();
    m.cfg.max_depth = c.at("max_depth").get<int>();
    m.cfg.learning_rate = c.at("learning_rate").get<double>();
    m.cfg.reg_lambda = c.at("reg_lambda").get<double>();
    m.cfg.min_leaf = c.at("min_leaf").get<int>();
    m.n_features = j.at("n_features").get<int>();
    m.base_score = j.at("base_score").get<double>();
    for (const json& nodes : j.at("trees")) {
        Tree t;
        for (const json& n : nodes) {
            TreeNode node;
            node.feature = n.at(0).get<int>();
            node.threshold = n.at(1).get<double>();
            node.left = n.at(2).get<int>();
            node.right = n.at(3).get<int>();
            node.value = n.at(4).get<double>();
            t.nodes.push_back(node);
        }
        m.trees.push_back(std::move(t));
    }
    return m;
}

json isotonic_to_json(const IsotonicModel& m) {
    return json{{"x", m.x}, {"y", m.y}};
}

IsotonicModel isotonic_from_json(const json& j) {
    IsotonicModel m;
    m.x = j.at("x").get<std::vector<double>>();
    m.y = j.at("y").get<std::vector<double>>();
    return m;
}

json stage_to_json(const CascadeStage& s) {
    return json{{"constant", s.constant},
                {"constant_value", s.constant_value},
                {"gbdt", gbdt_to_json(s.gbdt)},
                {"calibration", isotonic_to_json(s.calib)}};
}

CascadeStage stage_from_json(const json& j) {
    CascadeStage s;
    s.constant = j.at("constant").get<bool>();
    s.constant_value = j.at("constant_value").get<double>();
    s.gbdt = gbdt_from_json(j.at("gbdt"));
    s.calib = isotonic_from_json(j.at("calibration"));
    return s;
}

json cascade_config_to_json(const CascadeConfig& c) {
    return json{{"features",
                 {{"top_m", c.features.top_m},
                  {"max_subsets_per_side", c.features.max_subsets_per_side},
                  {"prune_threshold", c.features.prune_threshold}}},
                {"gbdt",
                 {{"n_trees", c.gbdt.n_trees},
                  {"max_depth", c.gbdt.max_depth},
                  {"learning_rate", c.gbdt.learning_rate},
                  {"reg_lambda", c.gbdt.reg_lambda},
                  {"min_leaf", c.gbdt.min_leaf}}},
                {"stages", c.stages},
                {"label_smoothing", c.label_smoothing},
                {"decision_threshold", c.decision_threshold},
                {"calib_stride", c.calib_stride},
                {"seed", c.seed}};
}

CascadeConfig cascade_config_from_json(const json& j) {
    CascadeConfig c;
    const json& f = j.at("features");
    c.features.top_m = f.at("top_m").get<int>();
    c.features.max_subsets_per_side = f.at("max_subsets_per_side").get<int>();
    c.features.prune_threshold = f.at("prune_threshold").get<double>();
    const json& g = j.at("gbdt");
    c.gbdt.n_trees = g.at("n_trees").get<int>();
    c.gbdt.max_depth = g.at("max_depth").get<int>();
    c.gbdt.learning_rate = g.at("learning_rate").get<double>();
    c.gbdt.reg_lambda = g.at("reg_lambda").get<double>();
    c.gbdt.min_leaf = g.at("min_leaf").get<int>();
    c.stages = j.at("stages").get<int>();
    c.label_smoothing = j.at("label_smoothing").get<double>();
    c.decision_threshold = j.at("decision_threshold").get<double>();
    c.calib_stride = j.at("calib_stride").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& data) {
    auto out = open_out(path);
    for (int j = 0; j < data.d(); ++j) {
        if (j) out << ',';
        out << data.names[static_cast<size_t>(j)];
    }
    out << '\n';
    for (int i = 0; i < data.n(); ++i) {
        for (int j = 0; j < data.d(); ++j) {
            if (j) out << ',';
            out << format_double(data.X(i, j));
        }
        out << '\n';
    }
}

Dataset read_dataset_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    Dataset data;
    data.names = split_csv_line(line);
    int d = static_cast<int>(data.names.size());
    std::vector<double> values;
    int n = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != d)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(d) + " columns, got " +
                                     std::to_string(cells.size()));
        for (const auto& cell : cells) values.push_back(parse_double(cell, path, lineno));
        ++n;
    }
    data.X.resize(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) data.X(i, j) = values[static_cast<size_t>(i) * d + j];
    return data;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    auto out = open_out(path);
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::vector<std::vector<double>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto cells = split_csv_line(line);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) row.push_back(parse_double(cell, path, lineno));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged rows");
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return m;
}

json graph_to_json(const Admg& g) {
    json directed = json::array();
    json bidirected = json::array();
    for (int i = 0; i < g.d; ++i)
        for (int j = 0; j < g.d; ++j) {
            if (g.D(i, j)) directed.push_back(json::array({i, j}));
            if (i < j && g.B(i, j)) bidirected.push_back(json::array({i, j}));
        }
    return json{{"d", g.d}, {"directed", std::move(directed)}, {"bidirected", std::move(bidirected)}};
}

Admg graph_from_json(const json& j) {
    int d = j.at("d").get<int>();
    if (d < 0) throw std::runtime_error("graph json: negative d");
    Admg g = Admg::empty(d);
    auto check = [&](int v) {
        if (v < 0 || v >= d) throw std::runtime_error("graph json: node index out of range");
    };
    for (const json& e : j.at("directed")) {
        int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        check(a);
        check(b);
        if (a == b) throw std::runtime_error("graph json: self loop");
        g.D(a, b) = 1;
    }
    for (const json& e : j.at("bidirected")) {
        int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        check(a);
        check(b);
        if (a == b) throw std::runtime_error("graph json: self loop");
        g.B(a, b) = g.B(b, a) = 1;
    }
    return g;
}

json pag_to_json(const Pag& p) {
    json edges = json::array();
    for (int i = 0; i < p.d; ++i)
        for (int j = i + 1; j < p.d; ++j)
            if (p.adjacent(i, j))
                edges.push_back(json{{"i", i},
                                     {"j", j},
                                     {"mark_at_i", mark_name(p.mark(j, i))},
                                     {"mark_at_j", mark_name(p.mark(i, j))}});
    return json{{"d", p.d}, {"edges", std::move(edges)}};
}

Pag pag_from_json(const json& j) {
    int d = j.at("d").get<int>();
    if (d < 0) throw std::runtime_error("pag json: negative d");
    Pag p = Pag::empty(d);
    for (const json& e : j.at("edges")) {
        int a = e.at("i").get<int>(), b = e.at("j").get<int>();
        if (a < 0 || b < 0 || a >= d || b >= d || a == b)
            throw std::runtime_error("pag json: bad edge endpoints");
        p.add_edge(a, b, mark_from_name(e.at("mark_at_i").get<std::string>()),
                   mark_from_name(e.at("mark_at_j").get<std::string>()));
    }
    return p;
}

json params_to_json(const ScmParams& p) {
    return json{{"d", p.d}, {"delta", matrix_to_json(p.delta)}, {"beta", matrix_to_json(p.beta)}};
}

ScmParams params_from_json(const json& j) {
    ScmParams p;
    p.d = j.at("d").get<int>();
    p.delta = matrix_from_json(j.at("delta"));
    p.beta = matrix_from_json(j.at("beta"));
    if (p.delta.rows() != p.d || p.delta.cols() != p.d || p.beta.rows() != p.d ||
        p.beta.cols() != p.d)
        throw std::runtime_error("params json: matrix shape mismatch");
    return p;
}

void write_trace_jsonl(const std::string& path, const std::vector<TraceRecord>& trace) {
    auto out = open_out(path);
    for (const TraceRecord& r : trace) {
        json j{{"t_outer", r.t_outer},
               {"t_inner", r.t_inner},
               {"f", r.f},
               {"h", r.h},
               {"accepted", r.accepted}};
        out << j.dump() << '\n';
    }
}

std::vector<TraceRecord> read_trace_jsonl(const std::string& path) {
    auto in = open_in(path);
    std::vector<TraceRecord> trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        TraceRecord r;
        r.t_outer = j.at("t_outer").get<int>();
        r.t_inner = j.at("t_inner").get<int>();
        r.f = number_or_nan(j.at("f"));
        r.h = number_or_nan(j.at("h"));
        r.accepted = j.at("accepted").get<long>();
        trace.push_back(r);
    }
    return trace;
}

json model_to_json(const CascadeModel& m) {
    json stages = json::array();
    for (const CascadeStage& s : m.stages) stages.push_back(stage_to_json(s));
    return json{{"format", "spotcd-cascade"},
                {"schema_version", m.schema_version},
                {"config", cascade_config_to_json(m.cfg)},
                {"stages", std::move(stages)},
                {"corpus_ids", m.corpus_ids}};
}

CascadeModel model_from_json(const json& j) {
    if (j.value("format", "") != "spotcd-cascade")
        throw std::runtime_error("model json: unexpected format tag");
    CascadeModel m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1)
        throw std::runtime_error("model json: unsupported schema_version " +
                                 std::to_string(m.schema_version));
    m.cfg = cascade_config_from_json(j.at("config"));
    for (const json& s : j.at("stages")) m.stages.push_back(stage_from_json(s));
    m.corpus_ids = j.at("corpus_ids").get<std::vector<std::string>>();
    return m;
}

json adapted_to_json(const AdaptedModel& m) {
    return json{{"format", "spotcd-adapted"},
                {"schema_version", 1},
                {"base", model_to_json(m.base)},
                {"head", gbdt_to_json(m.gbdt)},
                {"calibration", isotonic_to_json(m.calib)},
                {"constant", m.constant},
                {"constant_value", m.constant_value}};
}

AdaptedModel adapted_from_json(const json& j) {
    if (j.value("format", "") != "spotcd-adapted")
        throw std::runtime_error("model json: unexpected format tag");
    if (j.at("schema_version").get<int>() != 1)
        throw std::runtime_error("model json: unsupported schema_version");
    AdaptedModel m;
    m.base = model_from_json(j.at("base"));
    m.gbdt = gbdt_from_json(j.at("head"));
    m.calib = isotonic_from_json(j.at("calibration"));
    m.constant = j.at("constant").get<bool>();
    m.constant_value = j.at("constant_value").get<double>();
    return m;
}

void write_json(const std::string& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
    auto in = open_in(path);
    json j;
    in >> j;
    return j;
}

}  // namespace spotcd
