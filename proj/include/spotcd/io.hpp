#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spotcd/abic.hpp"
#include "spotcd/cascade.hpp"
#include "spotcd/graph.hpp"
#include "spotcd/scm.hpp"

namespace spotcd {

// All writers produce byte-stable output for identical inputs; numeric text
// uses round-trip precision so write -> read -> write is identity.

void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path);  // header row required

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// {"d": int, "directed": [[i, j], ...], "bidirected": [[i, j], ...]},
// 0-based, i < j for bidirected pairs.
nlohmann::json graph_to_json(const Admg& g);
Admg graph_from_json(const nlohmann::json& j);

// {"d": int, "edges": [{"i", "j", "mark_at_i", "mark_at_j"}]}, i < j,
// marks in {"circle", "arrow", "tail"}.
nlohmann::json pag_to_json(const Pag& p);
Pag pag_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const ScmParams& p);
ScmParams params_from_json(const nlohmann::json& j);

// One record per line: {"t_outer", "t_inner", "f", "h", "accepted"}.
void write_trace_jsonl(const std::string& path, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_jsonl(const std::string& path);

nlohmann::json model_to_json(const CascadeModel& m);
CascadeModel model_from_json(const nlohmann::json& j);
nlohmann::json adapted_to_json(const AdaptedModel& m);
AdaptedModel adapted_from_json(const nlohmann::json& j);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace spotcd
