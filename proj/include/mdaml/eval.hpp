#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdaml/data.hpp"
#include "mdaml/model.hpp"

namespace mdaml {

struct TripletOptions {
  int per_anchor_similar = 10;
  int per_anchor_dissimilar = 10;
  /// Pair the m-th similar with the m-th dissimilar (T ≈ 10·N) by default;
  /// the cross product of both lists (T ≈ 100·N) when set.
  bool cross_product = false;
  std::uint64_t seed = 0;
};

/// Per-anchor sampling of same-class and different-class partners without
/// replacement. Anchors whose class has no other member are skipped with a
/// warning on stderr. Deterministic per seed.
TripletSet generate_triplets(const Dataset& train, const TripletOptions& opt);

/// Majority vote among the k training points nearest to the query under M.
/// Distance ties prefer the smaller train index; vote ties the smallest
/// class id.
int knn_predict(const SpdMatrix& m, const Dataset& train,
                const Eigen::VectorXd& query, int k = 3);

/// Fraction of matching entries.
double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& truth);

/// Grid search on trial 0's training data (internal 70/30 sub-split); the
/// winning (K, λ₁) pair is frozen for all trials.
struct TuneSpec {
  std::vector<int> k_grid = {2, 4, 6, 8, 10, 15, 20, 25, 30, 40, 50};
  std::vector<double> lambda1_grid = {0.1, 1.0, 10.0, 100.0, 1000.0};
};

struct BenchmarkOptions {
  SplitSpec split;
  MdamlParams params;
  TripletOptions triplets;
  bool include_fixed_weights = false;
  int knn_k = 3;
  int threads = 0;  // 0 = hardware concurrency
  std::optional<TuneSpec> tune;
};

struct MethodResult {
  std::string method;
  std::vector<double> per_trial_accuracy;
  std::vector<double> train_seconds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

struct TrialDiagnostics {
  int trial = 0;
  std::vector<double> objective_trace;
  int outer_iters = 0;
  bool converged = false;
};

struct BenchmarkReport {
  std::vector<MethodResult> methods;
  std::vector<TrialDiagnostics> mdaml_trials;
  int chosen_num_anchors = 0;
  double chosen_lambda1 = 0.0;

  const MethodResult& method(const std::string& name) const;
};

/// The paper's protocol per trial: split, z-score on train, generate
/// triplets, fit MDaML, then 3NN accuracy under the learned metric and the
/// identity (EUCLID) baseline, plus the fixed-weight ablation when
/// requested. Trials run in a bounded worker pool; results are assembled in
/// trial order.
BenchmarkReport run_benchmark(const Dataset& data,
                              const BenchmarkOptions& opt);

}  // namespace mdaml
