#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "spotcd/io.hpp"

using namespace spotcd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("spotcd_io_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

Admg two_edge_graph() {
    Admg g = Admg::empty(4);
    g.D(0, 1) = 1;
    g.D(2, 3) = 1;
    g.B(1, 2) = g.B(2, 1) = 1;
    return g;
}

}  // namespace

TEST_CASE("dataset csv round trip is byte stable") {
    TempDir tmp;
    Dataset data;
    data.names = {"alpha", "b2", "c"};
    data.X.resize(4, 3);
    data.X << 1.0, -2.5, 3.25e-8,
              0.1, 1e20, -0.0,
              12345.6789, 2.2250738585072014e-308, 7,
              -1.5, 0.3333333333333333, 2;
    const std::string p1 = tmp.file("d.csv");
    write_dataset_csv(p1, data);
    Dataset back = read_dataset_csv(p1);
    CHECK(back.names == data.names);
    REQUIRE(back.X.rows() == data.X.rows());
    REQUIRE(back.X.cols() == data.X.cols());
    REQUIRE(back.X == data.X);  // exact, round-trip precision
    const std::string p2 = tmp.file("d2.csv");
    write_dataset_csv(p2, back);
    CHECK(slurp(p1) == slurp(p2));

    const std::string header = slurp(p1).substr(0, slurp(p1).find('\n'));
    CHECK(header == "alpha,b2,c");
}

TEST_CASE("dataset csv rejects malformed input") {
    TempDir tmp;
    const std::string p = tmp.file("bad.csv");
    spit(p, "a,b\n1.0,xyz\n");
    CHECK_THROWS_AS(read_dataset_csv(p), std::runtime_error);
    spit(p, "a,b\n1.0\n");
    CHECK_THROWS_AS(read_dataset_csv(p), std::runtime_error);
    CHECK_THROWS_AS(read_dataset_csv(tmp.file("missing.csv")), std::runtime_error);
}

TEST_CASE("dataset csv tolerates crlf and blank lines") {
    TempDir tmp;
    const std::string p = tmp.file("crlf.csv");
    spit(p, "a,b\r\n1,2\r\n\r\n3,4\r\n");
    Dataset d = read_dataset_csv(p);
    CHECK(d.names == std::vector<std::string>{"a", "b"});
    REQUIRE(d.n() == 2);
    CHECK(d.X(1, 1) == 4.0);
}

TEST_CASE("matrix csv round trip") {
    TempDir tmp;
    Eigen::MatrixXd m(2, 3);
    m << 0.1, -2, 3e-5, 4, 5.5, -0.25;
    const std::string p = tmp.file("m.csv");
    write_matrix_csv(p, m);
    Eigen::MatrixXd back = read_matrix_csv(p);
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    CHECK(back == m);
}

TEST_CASE("graph json round trip and shape") {
    Admg g = two_edge_graph();
    nlohmann::json j = graph_to_json(g);
    CHECK(j["d"] == 4);
    CHECK(j["directed"].size() == 2);
    CHECK(j["bidirected"].size() == 1);
    CHECK(j["bidirected"][0][0] == 1);  // stored with i < j
    CHECK(j["bidirected"][0][1] == 2);
    Admg back = graph_from_json(j);
    CHECK(back == g);

    nlohmann::json bad = j;
    bad["directed"].push_back({3, 3});
    CHECK_THROWS_AS(graph_from_json(bad), std::exception);
    bad = j;
    bad["directed"].push_back({0, 9});
    CHECK_THROWS_AS(graph_from_json(bad), std::exception);
}

TEST_CASE("pag json round trip preserves mark orientation") {
    Pag p = Pag::empty(3);
    p.add_edge(0, 1, Mark::Tail, Mark::Arrow);    // 0 -> 1
    p.add_edge(1, 2, Mark::Circle, Mark::Arrow);  // 1 o-> 2
    nlohmann::json j = pag_to_json(p);
    CHECK(j["d"] == 3);
    REQUIRE(j["edges"].size() == 2);
    bool saw01 = false;
    for (const auto& e : j["edges"])
        if (e["i"] == 0 && e["j"] == 1) {
            saw01 = true;
            CHECK(e["mark_at_j"] == "arrow");
            CHECK(e["mark_at_i"] == "tail");
        }
    CHECK(saw01);
    Pag back = pag_from_json(j);
    CHECK(back == p);

    nlohmann::json bad = j;
    bad["edges"][0]["mark_at_i"] = "squiggle";
    CHECK_THROWS_AS(pag_from_json(bad), std::exception);
}

TEST_CASE("params json round trip") {
    ScmParams p = ScmParams::zero(3);
    p.delta(0, 1) = 1.25;
    p.delta(1, 2) = -0.75;
    p.beta.setIdentity();
    p.beta(0, 2) = p.beta(2, 0) = 0.4;
    nlohmann::json j = params_to_json(p);
    ScmParams back = params_from_json(j);
    CHECK(back.delta == p.delta);
    CHECK(back.beta == p.beta);

    nlohmann::json bad = j;
    bad["beta"][0] = {1.0, 0.0};  // ragged row
    CHECK_THROWS_AS(params_from_json(bad), std::exception);
}

TEST_CASE("trace jsonl round trip keeps non-finite objective values") {
    TempDir tmp;
    std::vector<TraceRecord> trace = {
        {0, 0, 12.5, 0.3, 7},
        {0, 1, std::numeric_limits<double>::quiet_NaN(), 0.2, 5},
        {1, 0, -3.25, 0.0, 9},
    };
    const std::string p = tmp.file("trace.jsonl");
    write_trace_jsonl(p, trace);
    std::vector<TraceRecord> back = read_trace_jsonl(p);
    REQUIRE(back.size() == 3);
    CHECK(back[0].f == 12.5);
    CHECK(back[0].accepted == 7);
    CHECK(std::isnan(back[1].f));
    CHECK(back[1].h == 0.2);
    CHECK(back[2].t_outer == 1);
    CHECK(back[2].f == -3.25);

    const std::string text = slurp(p);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find("null") != std::string::npos);
}

TEST_CASE("cascade model json round trip predicts bitwise identically") {
    Eigen::MatrixXd X(6, 2);
    X << 1, 0, 2, 1, 3, 0, 4, 1, 5, 0, 6, 1;
    Eigen::VectorXd y(6);
    y << 0, 0, 1, 0, 1, 1;
    GbdtConfig gcfg;
    gcfg.n_trees = 4;
    gcfg.max_depth = 2;
    CascadeModel m;
    m.cfg.gbdt = gcfg;
    m.cfg.stages = 2;
    m.corpus_ids = {"a", "b"};
    for (int s = 0; s < 2; ++s) {
        CascadeStage st;
        st.gbdt = gbdt_train(X, y, gcfg);
        st.calib = isotonic_fit({0.1, 0.4, 0.6, 0.9}, {0, 0, 1, 1});
        m.stages.push_back(std::move(st));
    }
    nlohmann::json j = model_to_json(m);
    CHECK(j["format"] == "spotcd-cascade");
    CHECK(j["schema_version"] == 1);
    CascadeModel back = model_from_json(j);
    REQUIRE(back.stages.size() == 2);
    CHECK(back.corpus_ids == m.corpus_ids);
    CHECK(back.cfg.stages == 2);
    for (int r = 0; r < X.rows(); ++r)
        REQUIRE(back.stages[0].gbdt.predict_margin(X.row(r)) ==
                m.stages[0].gbdt.predict_margin(X.row(r)));
    for (double v : {0.05, 0.3, 0.77})
        REQUIRE(back.stages[1].calib.apply(v) == m.stages[1].calib.apply(v));
    CHECK(model_to_json(back) == j);  // write -> read -> write identity

    nlohmann::json bad = j;
    bad["format"] = "other";
    CHECK_THROWS_AS(model_from_json(bad), std::exception);
    bad = j;
    bad["schema_version"] = 2;
    CHECK_THROWS_AS(model_from_json(bad), std::exception);
}

TEST_CASE("adapted model json round trip") {
    Eigen::MatrixXd X(4, 3);
    X.setRandom();
    Eigen::VectorXd y(4);
    y << 0, 1, 1, 0;
    GbdtConfig gcfg;
    gcfg.n_trees = 3;
    gcfg.max_depth = 2;
    AdaptedModel am;
    am.base.cfg.stages = 1;
    CascadeStage st;
    st.constant = true;
    st.constant_value = 0.25;
    am.base.stages.push_back(st);
    am.gbdt = gbdt_train(X, y, gcfg);
    am.calib = isotonic_fit({0.2, 0.8}, {0, 1});
    nlohmann::json j = adapted_to_json(am);
    CHECK(j["format"] == "spotcd-adapted");
    AdaptedModel back = adapted_from_json(j);
    CHECK(back.base.stages.size() == 1);
    CHECK(back.base.stages[0].constant);
    CHECK(back.base.stages[0].constant_value == 0.25);
    for (int r = 0; r < X.rows(); ++r)
        REQUIRE(back.gbdt.predict_margin(X.row(r)) == am.gbdt.predict_margin(X.row(r)));
    CHECK(adapted_to_json(back) == j);
}

TEST_CASE("write_json emits stable indented text") {
    TempDir tmp;
    nlohmann::json j = {{"b", 2}, {"a", 1}};
    const std::string p = tmp.file("x.json");
    write_json(p, j);
    const std::string text = slurp(p);
    CHECK(text.back() == '\n');
    CHECK(read_json(p) == j);
    const std::string p2 = tmp.file("y.json");
    write_json(p2, read_json(p));
    CHECK(slurp(p) == slurp(p2));
    CHECK_THROWS_AS(read_json(tmp.file("absent.json")), std::exception);
}
