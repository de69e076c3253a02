#include "mdaml/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <map>
#include <numeric>
#include <thread>

#include "mdaml/errors.hpp"
#include "mdaml/rng.hpp"

namespace mdaml {

namespace {

// Stream salts keeping the per-trial RNG streams disjoint.
constexpr std::uint64_t kTripletStream = 0x74'72'69;
constexpr std::uint64_t kFitStream = 0x66'69'74;
constexpr std::uint64_t kTuneStream = 0x74'75'6e;

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double std_of(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / v.size());
}

}  // namespace

TripletSet generate_triplets(const Dataset& train, const TripletOptions& opt) {
  train.validate();
  if (!train.labeled()) {
    throw DataError("generate_triplets: labels required");
  }
  if (opt.per_anchor_similar < 1 || opt.per_anchor_dissimilar < 1) {
    throw ConfigError("generate_triplets: per-anchor counts must be positive");
  }
  const int n = train.num_samples();
  const Eigen::VectorXi& y = *train.labels;

  std::vector<std::vector<int>> by_class(train.num_classes());
  for (int i = 0; i < n; ++i) by_class[y(i)].push_back(i);

  Rng rng = make_rng(opt.seed, kTripletStream);
  std::vector<Triplet> triplets;
  bool warned_singleton = false;
  for (int i = 0; i < n; ++i) {
    std::vector<int> same;
    for (int j : by_class[y(i)]) {
      if (j != i) same.push_back(j);
    }
    if (same.empty()) {
      if (!warned_singleton) {
        std::cerr << "warning: skipping anchors whose class has a single "
                     "member\n";
        warned_singleton = true;
      }
      continue;
    }
    std::vector<int> other;
    for (int c = 0; c < train.num_classes(); ++c) {
      if (c == y(i)) continue;
      other.insert(other.end(), by_class[c].begin(), by_class[c].end());
    }
    if (other.empty()) continue;

    std::shuffle(same.begin(), same.end(), rng);
    std::shuffle(other.begin(), other.end(), rng);
    const int n_same = std::min<int>(opt.per_anchor_similar, same.size());
    const int n_other =
        std::min<int>(opt.per_anchor_dissimilar, other.size());

    if (opt.cross_product) {
      for (int a = 0; a < n_same; ++a) {
        for (int b = 0; b < n_other; ++b) {
          triplets.push_back({i, same[a], other[b]});
        }
      }
    } else {
      const int pairs = std::min(n_same, n_other);
      for (int a = 0; a < pairs; ++a) {
        triplets.push_back({i, same[a], other[a]});
      }
    }
  }
  return TripletSet(std::move(triplets), n);
}

int knn_predict(const SpdMatrix& m, const Dataset& train,
                const Eigen::VectorXd& query, int k) {
  if (k < 1) throw ConfigError("knn: k must be >= 1");
  if (!train.labeled()) throw DataError("knn: labels required");
  const int n = train.num_samples();
  if (k > n) throw ConfigError("knn: k exceeds training size");

  std::vector<std::pair<double, int>> dist(n);
  for (int i = 0; i < n; ++i) {
    dist[i] = {mahalanobis_sq(m, query, train.features.row(i)), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  std::map<int, int> votes;
  for (int i = 0; i < k; ++i) votes[(*train.labels)(dist[i].second)]++;
  int best_class = -1;
  int best_votes = -1;
  for (const auto& [cls, cnt] : votes) {
    if (cnt > best_votes) {  // map iterates ids ascending: ties keep smallest
      best_class = cls;
      best_votes = cnt;
    }
  }
  return best_class;
}

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& truth) {
  if (predictions.empty() || predictions.size() != truth.size()) {
    throw std::invalid_argument(
        "accuracy: prediction/truth lengths must match and be nonempty");
  }
  int correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / predictions.size();
}

const MethodResult& BenchmarkReport::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw std::invalid_argument("benchmark report has no method '" + name + "'");
}

namespace {

struct TrialOutcome {
  double acc_mdaml = 0.0;
  double acc_euclid = 0.0;
  double acc_fixed = 0.0;
  double fit_seconds = 0.0;
  double fixed_fit_seconds = 0.0;
  TrialDiagnostics diag;
};

double evaluate_knn(const SpdMatrix& m, const Dataset& train,
                    const Dataset& test, int k) {
  std::vector<int> preds(test.num_samples());
  std::vector<int> truth(test.num_samples());
  for (int i = 0; i < test.num_samples(); ++i) {
    preds[i] = knn_predict(m, train, test.features.row(i), k);
    truth[i] = (*test.labels)(i);
  }
  return accuracy(preds, truth);
}

TrialOutcome run_trial(const Dataset& data, const BenchmarkOptions& opt,
                       const MdamlParams& params, int trial) {
  auto [train, test] = stratified_split(data, opt.split, trial);
  if (train.num_samples() < params.num_anchors) {
    throw ConfigError("benchmark: training split smaller than K");
  }
  Normalizer norm = fit_normalizer(train);
  Dataset train_n = apply(norm, train);
  Dataset test_n = apply(norm, test);

  TripletOptions topt = opt.triplets;
  topt.seed = derive_seed(opt.split.seed, kTripletStream + trial);
  TripletSet trips = generate_triplets(train_n, topt);

  MdamlParams p = params;
  p.seed = derive_seed(opt.split.seed, kFitStream + trial);

  TrialOutcome out;
  FitResult fitted = fit(train_n, trips, p);
  out.fit_seconds = fitted.report.wall_time_seconds;
  out.diag.trial = trial;
  out.diag.objective_trace = fitted.report.objective_per_outer;
  out.diag.outer_iters = fitted.report.outer_iters;
  out.diag.converged = fitted.report.converged;

  out.acc_mdaml = evaluate_knn(fitted.metric, train_n, test_n, opt.knn_k);
  out.acc_euclid = evaluate_knn(SpdMatrix::identity(train_n.dim()), train_n,
                                test_n, opt.knn_k);

  if (opt.include_fixed_weights) {
    MdamlParams pf = p;
    pf.fixed_triplet_weights = true;
    FitResult fixed = fit(train_n, trips, pf);
    out.fixed_fit_seconds = fixed.report.wall_time_seconds;
    out.acc_fixed = evaluate_knn(fixed.metric, train_n, test_n, opt.knn_k);
  }
  return out;
}

/// Select (K, λ₁) on trial 0's training data via an internal 70/30 split.
std::pair<int, double> tune_first_trial(const Dataset& data,
                                        const BenchmarkOptions& opt) {
  const TuneSpec& tune = *opt.tune;
  auto [train, test_unused] = stratified_split(data, opt.split, 0);
  (void)test_unused;

  SplitSpec inner = opt.split;
  inner.seed = derive_seed(opt.split.seed, kTuneStream);
  auto [sub_train, sub_val] = stratified_split(train, inner, 0);
  Normalizer norm = fit_normalizer(sub_train);
  Dataset tr = apply(norm, sub_train);
  Dataset va = apply(norm, sub_val);

  TripletOptions topt = opt.triplets;
  topt.seed = derive_seed(opt.split.seed, kTuneStream + 1);
  TripletSet trips = generate_triplets(tr, topt);

  int best_k = -1;
  double best_lambda1 = 0.0;
  double best_acc = -1.0;
  for (int k : tune.k_grid) {
    if (k > tr.num_samples()) continue;
    for (double lambda1 : tune.lambda1_grid) {
      MdamlParams p = opt.params;
      p.num_anchors = k;
      p.lambda1 = lambda1;
      p.seed = derive_seed(opt.split.seed, kTuneStream + 2);
      p.validate();
      FitResult fitted = fit(tr, trips, p);
      const double acc = evaluate_knn(fitted.metric, tr, va, opt.knn_k);
      if (acc > best_acc) {
        best_acc = acc;
        best_k = k;
        best_lambda1 = lambda1;
      }
    }
  }
  if (best_k < 0) {
    throw ConfigError("tune: no admissible grid point (K grid too large?)");
  }
  return {best_k, best_lambda1};
}

}  // namespace

BenchmarkReport run_benchmark(const Dataset& data,
                              const BenchmarkOptions& opt) {
  data.validate();
  if (!data.labeled()) throw DataError("benchmark: labels required");
  opt.split.validate();

  MdamlParams params = opt.params;
  BenchmarkReport report;
  if (opt.tune) {
    auto [k, lambda1] = tune_first_trial(data, opt);
    params.num_anchors = k;
    params.lambda1 = lambda1;
  }
  params.validate();
  report.chosen_num_anchors = params.num_anchors;
  report.chosen_lambda1 = params.lambda1;

  const int trials = opt.split.trials;
  std::vector<TrialOutcome> outcomes(trials);
  std::vector<std::exception_ptr> failures(trials);

  int workers = opt.threads > 0
                    ? opt.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, trials));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
      try {
        outcomes[t] = run_trial(data, opt, params, t);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (int t = 0; t < trials; ++t) {
    if (failures[t]) {
      try {
        std::rethrow_exception(failures[t]);
      } catch (const std::exception& e) {
        throw NumericError("benchmark trial " + std::to_string(t) +
                           " failed: " + e.what());
      }
    }
  }

  auto add_method = [&](const std::string& name, auto acc_of, auto time_of) {
    MethodResult mr;
    mr.method = name;
    for (int t = 0; t < trials; ++t) {
      mr.per_trial_accuracy.push_back(acc_of(outcomes[t]));
      mr.train_seconds.push_back(time_of(outcomes[t]));
    }
    mr.mean_accuracy = mean_of(mr.per_trial_accuracy);
    mr.std_accuracy = std_of(mr.per_trial_accuracy, mr.mean_accuracy);
    report.methods.push_back(std::move(mr));
  };

  add_method(
      "MDaML", [](const TrialOutcome& o) { return o.acc_mdaml; },
      [](const TrialOutcome& o) { return o.fit_seconds; });
  add_method(
      "EUCLID", [](const TrialOutcome& o) { return o.acc_euclid; },
      [](const TrialOutcome&) { return 0.0; });
  if (opt.include_fixed_weights) {
    add_method(
        "MDaML-Fixed", [](const TrialOutcome& o) { return o.acc_fixed; },
        [](const TrialOutcome& o) { return o.fixed_fit_seconds; });
  }
  for (int t = 0; t < trials; ++t) {
    report.mdaml_trials.push_back(outcomes[t].diag);
  }
  return report;
}

}  // namespace mdaml
