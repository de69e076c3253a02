#include "mdaml/serialize.hpp"

#include <fstream>
#include <sstream>

#include "mdaml/errors.hpp"

namespace mdaml {

using nlohmann::json;

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
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw DataError("json: expected a non-empty array of rows");
  }
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw DataError("json: ragged matrix rows");
    }
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw DataError("json: expected an array");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

namespace {

json trace_to_json(const RcgdTrace& t) {
  return json{{"objective", t.objective_per_iter},
              {"grad_norm", t.grad_norm_per_iter},
              {"iters_used", t.iters_used},
              {"converged", t.converged}};
}

json report_to_json(const FitReport& r) {
  json traces = json::array();
  for (const auto& t : r.rcgd_traces) traces.push_back(trace_to_json(t));
  return json{{"objective_per_outer", r.objective_per_outer},
              {"outer_iters", r.outer_iters},
              {"converged", r.converged},
              {"rcgd_traces", std::move(traces)}};
}

FitReport report_from_json(const json& j) {
  FitReport r;
  r.objective_per_outer = j.at("objective_per_outer").get<std::vector<double>>();
  r.outer_iters = j.at("outer_iters").get<int>();
  r.converged = j.at("converged").get<bool>();
  for (const auto& tj : j.at("rcgd_traces")) {
    RcgdTrace t;
    t.objective_per_iter = tj.at("objective").get<std::vector<double>>();
    t.grad_norm_per_iter = tj.at("grad_norm").get<std::vector<double>>();
    t.iters_used = tj.at("iters_used").get<int>();
    t.converged = tj.at("converged").get<bool>();
    r.rcgd_traces.push_back(std::move(t));
  }
  return r;
}

}  // namespace

json model_to_json(const TrainedModel& model) {
  return json{{"schema_version", model.schema_version},
              {"dim", model.metric.dim()},
              {"metric", matrix_to_json(model.metric.matrix())},
              {"centers", matrix_to_json(model.anchors.centers)},
              {"weights", matrix_to_json(model.anchors.weights)},
              {"normalizer",
               {{"mean", vector_to_json(model.normalizer.mean)},
                {"std", vector_to_json(model.normalizer.stddev)}}},
              {"report", report_to_json(model.report)}};
}

TrainedModel model_from_json(const json& j) {
  int version = j.at("schema_version").get<int>();
  if (version != 1) {
    throw DataError("model: unsupported schema_version " +
                    std::to_string(version));
  }
  TrainedModel model{version,
                     SpdMatrix(matrix_from_json(j.at("metric"))),
                     AnchorModel{matrix_from_json(j.at("centers")),
                                 matrix_from_json(j.at("weights"))},
                     Normalizer{vector_from_json(j.at("normalizer").at("mean")),
                                vector_from_json(j.at("normalizer").at("std"))},
                     report_from_json(j.at("report"))};
  model.anchors.validate();
  return model;
}

void save_model(const std::string& path, const TrainedModel& model) {
  write_text_file(path, model_to_json(model).dump(2) + "\n");
}

TrainedModel load_model(const std::string& path) {
  json j = json::parse(read_text_file(path));
  return model_from_json(j);
}

json benchmark_to_json(const BenchmarkReport& report) {
  json methods = json::array();
  for (const auto& m : report.methods) {
    methods.push_back(json{{"method", m.method},
                           {"per_trial_accuracy", m.per_trial_accuracy},
                           {"train_seconds", m.train_seconds},
                           {"mean_accuracy", m.mean_accuracy},
                           {"std_accuracy", m.std_accuracy}});
  }
  json trials = json::array();
  for (const auto& t : report.mdaml_trials) {
    trials.push_back(json{{"trial", t.trial},
                          {"objective_trace", t.objective_trace},
                          {"outer_iters", t.outer_iters},
                          {"converged", t.converged}});
  }
  return json{{"methods", std::move(methods)},
              {"mdaml_trials", std::move(trials)},
              {"chosen_k", report.chosen_num_anchors},
              {"chosen_lambda1", report.chosen_lambda1}};
}

std::string benchmark_to_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "trial,method,accuracy,train_seconds\n";
  for (const auto& m : report.methods) {
    for (size_t t = 0; t < m.per_trial_accuracy.size(); ++t) {
      out << t << ',' << m.method << ',' << m.per_trial_accuracy[t] << ','
          << m.train_seconds[t] << '\n';
    }
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mdaml
