#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdaml/eval.hpp"
#include "mdaml/gradcheck.hpp"

namespace mdaml::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericError = 4,
  kCheckFailed = 5,
};

/// The full run configuration, assembled as defaults ← config file ← flags.
struct RunConfig {
  std::string data_path;
  std::string label = "label";  // column name, or an index when all digits
  bool has_header = true;

  SplitSpec split;
  MdamlParams params;
  TripletOptions triplets;

  bool fixed_weights = false;
  int knn_k = 3;
  int threads = 0;
  bool tune = false;
  TuneSpec tune_spec;

  std::string out = "mdaml_out";

  std::string sweep_parameter;
  std::vector<double> sweep_values;

  GradcheckOptions gradcheck;

  void validate_common() const;
};

/// Loads a JSON config file into `cfg`, rejecting unknown keys.
void apply_config_file(const std::string& path, RunConfig& cfg);

int cmd_train(const RunConfig& cfg);
int cmd_benchmark(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_gradcheck(const RunConfig& cfg);

/// Entry point behind main(); parses argv, dispatches, maps exceptions to
/// exit codes, and prints one machine-parsable JSON error line on failure.
int run(int argc, const char* const* argv);

}  // namespace mdaml::cli
