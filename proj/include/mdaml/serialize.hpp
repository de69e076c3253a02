#pragma once

#include <string>

#include "json.hpp"
#include "mdaml/data.hpp"
#include "mdaml/eval.hpp"
#include "mdaml/model.hpp"

namespace mdaml {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

/// Everything a training run persists. Reload re-validates the metric's SPD
/// invariant. Wall-clock time is deliberately not serialized so identical
/// configurations produce byte-identical files.
struct TrainedModel {
  int schema_version = 1;
  SpdMatrix metric;
  AnchorModel anchors;
  Normalizer normalizer;
  FitReport report;
};

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(const std::string& path);

nlohmann::json benchmark_to_json(const BenchmarkReport& report);
/// Flat table, one row per trial×method: trial,method,accuracy,train_seconds.
std::string benchmark_to_csv(const BenchmarkReport& report);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace mdaml
