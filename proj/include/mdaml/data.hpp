#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mdaml {

/// N×d feature matrix with optional class labels (contiguous ids 0…C−1).
struct Dataset {
  Eigen::MatrixXd features;
  std::optional<Eigen::VectorXi> labels;

  int num_samples() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  int num_classes() const;
  bool labeled() const { return labels.has_value(); }

  /// Throws DataError on non-finite features or out-of-range labels.
  void validate() const;
};

/// Column selection for the label when loading a CSV.
struct LabelColumn {
  std::optional<std::string> name;  // requires a header row
  std::optional<int> index;         // 0-based

  static LabelColumn by_name(std::string n) { return {std::move(n), {}}; }
  static LabelColumn by_index(int i) { return {{}, i}; }
  static LabelColumn none() { return {{}, {}}; }
  bool empty() const { return !name && !index; }

  /// Parses "name-or-index": digits are an index, anything else a name.
  static LabelColumn parse(const std::string& spec);
};

/// Loads a UTF-8 CSV of numeric features plus one optional label column.
/// Labels are remapped to 0…C−1 in first-appearance order. Ragged rows,
/// non-numeric features, and a missing label column raise DataError with
/// the offending 1-based row number.
Dataset load_csv(const std::string& path, const LabelColumn& label,
                 bool has_header = true);

/// Per-feature z-score statistics fitted on training data. Standard
/// deviations use the population convention (divide by N) and are floored at
/// 1e-12, so constant features map to zero.
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

Normalizer fit_normalizer(const Dataset& train);
Dataset apply(const Normalizer& norm, const Dataset& data);
Dataset apply_inverse(const Normalizer& norm, const Dataset& data);

struct SplitSpec {
  double train_fraction = 0.7;
  int trials = 10;
  std::uint64_t seed = 0;
  bool stratified = true;

  void validate() const;  // throws ConfigError
};

/// Deterministic train/test partition for the given trial index. Stratified
/// splits keep per-class proportions within one sample (largest-remainder
/// quotas); a class with a single sample goes to train with a warning on
/// stderr.
std::pair<Dataset, Dataset> stratified_split(const Dataset& data,
                                             const SplitSpec& spec, int trial);

}  // namespace mdaml
