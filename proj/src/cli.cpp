#include "mdaml/cli.hpp"

#include <cmath>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdaml/errors.hpp"
#include "mdaml/serialize.hpp"

namespace mdaml::cli {

using nlohmann::json;

void RunConfig::validate_common() const {
  split.validate();
  params.validate();
  if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

namespace {

void print_error(int code, const std::string& category,
                 const std::string& message) {
  json err{{"error",
            {{"code", code}, {"category", category}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

Dataset load_configured_dataset(const RunConfig& cfg) {
  if (cfg.data_path.empty()) {
    throw ConfigError("no dataset given (--data or config \"data\")");
  }
  return load_csv(cfg.data_path, LabelColumn::parse(cfg.label),
                  cfg.has_header);
}

BenchmarkOptions benchmark_options(const RunConfig& cfg) {
  BenchmarkOptions opt;
  opt.split = cfg.split;
  opt.params = cfg.params;
  opt.triplets = cfg.triplets;
  opt.include_fixed_weights = cfg.fixed_weights;
  opt.knn_k = cfg.knn_k;
  opt.threads = cfg.threads;
  if (cfg.tune) opt.tune = cfg.tune_spec;
  return opt;
}

/// Benchmark artifacts keep only run-to-run reproducible fields; wall-clock
/// timings go to stderr instead.
json deterministic_benchmark_json(const BenchmarkReport& report) {
  json j = benchmark_to_json(report);
  for (auto& m : j["methods"]) m.erase("train_seconds");
  return j;
}

std::string deterministic_benchmark_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "trial,method,accuracy\n";
  for (const auto& m : report.methods) {
    for (size_t t = 0; t < m.per_trial_accuracy.size(); ++t) {
      out << t << ',' << m.method << ',' << m.per_trial_accuracy[t] << '\n';
    }
  }
  return out.str();
}

void report_timings(const BenchmarkReport& report) {
  for (const auto& m : report.methods) {
    double total = 0.0;
    for (double s : m.train_seconds) total += s;
    std::cerr << "# " << m.method << ": mean accuracy " << m.mean_accuracy
              << " +/- " << m.std_accuracy << ", total train time " << total
              << " s\n";
  }
}

}  // namespace

void apply_config_file(const std::string& path, RunConfig& cfg) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");

  static const std::set<std::string> known = {
      "data",           "label",
      "has_header",     "train_fraction",
      "trials",         "seed",
      "stratified",     "k",
      "lambda1",        "lambda2",
      "eta",            "outer_max",
      "outer_tol",      "per_anchor_similar",
      "per_anchor_dissimilar",
      "cross_product_triplets",
      "fixed_weights",  "knn_k",
      "threads",        "out",
      "tune",           "tune_k_grid",
      "tune_lambda1_grid",
      "sweep_parameter", "sweep_values",
      "rcgd",           "gradcheck_instances"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("config file: unknown key '" + key + "'");
    }
  }

  auto get = [&](const char* key, auto& target) {
    if (j.contains(key)) j.at(key).get_to(target);
  };
  get("data", cfg.data_path);
  get("label", cfg.label);
  get("has_header", cfg.has_header);
  get("train_fraction", cfg.split.train_fraction);
  get("trials", cfg.split.trials);
  if (j.contains("seed")) {
    const auto seed = j.at("seed").get<std::uint64_t>();
    cfg.split.seed = seed;
    cfg.params.seed = seed;
    cfg.gradcheck.seed = seed;
  }
  get("stratified", cfg.split.stratified);
  get("k", cfg.params.num_anchors);
  get("lambda1", cfg.params.lambda1);
  get("lambda2", cfg.params.lambda2);
  get("eta", cfg.params.eta);
  get("outer_max", cfg.params.outer_max);
  get("outer_tol", cfg.params.outer_tol);
  get("per_anchor_similar", cfg.triplets.per_anchor_similar);
  get("per_anchor_dissimilar", cfg.triplets.per_anchor_dissimilar);
  get("cross_product_triplets", cfg.triplets.cross_product);
  get("fixed_weights", cfg.fixed_weights);
  get("knn_k", cfg.knn_k);
  get("threads", cfg.threads);
  get("out", cfg.out);
  get("tune", cfg.tune);
  get("tune_k_grid", cfg.tune_spec.k_grid);
  get("tune_lambda1_grid", cfg.tune_spec.lambda1_grid);
  get("sweep_parameter", cfg.sweep_parameter);
  get("sweep_values", cfg.sweep_values);
  get("gradcheck_instances", cfg.gradcheck.instances);

  if (j.contains("rcgd")) {
    const json& r = j.at("rcgd");
    static const std::set<std::string> rcgd_known = {
        "max_iters",      "grad_tol",       "armijo_c",  "backtrack_factor",
        "max_backtracks", "initial_step",   "beta_rule", "transport",
        "fixed_beta"};
    for (const auto& [key, value] : r.items()) {
      if (!rcgd_known.count(key)) {
        throw ConfigError("config file: unknown rcgd key '" + key + "'");
      }
    }
    RcgdConfig& rc = cfg.params.rcgd;
    if (r.contains("max_iters")) r.at("max_iters").get_to(rc.max_iters);
    if (r.contains("grad_tol")) r.at("grad_tol").get_to(rc.grad_tol);
    if (r.contains("armijo_c")) r.at("armijo_c").get_to(rc.armijo_c);
    if (r.contains("backtrack_factor")) {
      r.at("backtrack_factor").get_to(rc.backtrack_factor);
    }
    if (r.contains("max_backtracks")) {
      r.at("max_backtracks").get_to(rc.max_backtracks);
    }
    if (r.contains("initial_step")) {
      r.at("initial_step").get_to(rc.initial_step);
    }
    if (r.contains("beta_rule")) {
      const std::string rule = r.at("beta_rule").get<std::string>();
      if (rule == "fletcher_reeves") {
        rc.beta_rule = BetaRule::fletcher_reeves;
      } else if (rule == "polak_ribiere_plus") {
        rc.beta_rule = BetaRule::polak_ribiere_plus;
      } else {
        throw ConfigError("config file: unknown beta_rule '" + rule + "'");
      }
    }
    if (r.contains("transport")) {
      const std::string tr = r.at("transport").get<std::string>();
      if (tr == "airm") {
        rc.transport = TransportRule::airm;
      } else if (tr == "reprojection") {
        rc.transport = TransportRule::reprojection;
      } else {
        throw ConfigError("config file: unknown transport '" + tr + "'");
      }
    }
    if (r.contains("fixed_beta")) {
      rc.fixed_beta = r.at("fixed_beta").get<double>();
    }
  }
}

int cmd_train(const RunConfig& cfg) {
  cfg.validate_common();
  Dataset raw = load_configured_dataset(cfg);
  if (!raw.labeled()) {
    throw DataError("train: triplet generation requires a label column");
  }

  Normalizer norm = fit_normalizer(raw);
  Dataset data = apply(norm, raw);

  TripletOptions topt = cfg.triplets;
  topt.seed = cfg.params.seed;
  TripletSet trips = generate_triplets(data, topt);

  MdamlParams p = cfg.params;
  p.fixed_triplet_weights = cfg.fixed_weights;
  FitResult fitted = fit(data, trips, p);

  TrainedModel model{1, std::move(fitted.metric), std::move(fitted.anchors),
                     std::move(norm), std::move(fitted.report)};
  save_model(cfg.out, model);
  std::cerr << "# trained in " << model.report.wall_time_seconds << " s, "
            << model.report.outer_iters << " outer iterations; model -> "
            << cfg.out << "\n";
  return kOk;
}

int cmd_benchmark(const RunConfig& cfg) {
  cfg.validate_common();
  Dataset data = load_configured_dataset(cfg);
  BenchmarkReport report = run_benchmark(data, benchmark_options(cfg));

  write_text_file(cfg.out + ".json",
                  deterministic_benchmark_json(report).dump(2) + "\n");
  write_text_file(cfg.out + ".csv", deterministic_benchmark_csv(report));
  report_timings(report);
  return kOk;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.sweep_parameter.empty()) {
    throw ConfigError("sweep: --parameter is required");
  }
  if (cfg.sweep_values.empty()) {
    throw ConfigError("sweep: --values is required and must be nonempty");
  }
  static const std::set<std::string> allowed = {"K", "lambda1", "lambda2",
                                                "eta"};
  if (!allowed.count(cfg.sweep_parameter)) {
    throw ConfigError("sweep: parameter must be one of K, lambda1, lambda2, "
                      "eta");
  }
  Dataset data = load_configured_dataset(cfg);

  std::ostringstream csv;
  csv << "parameter,value,method,mean_accuracy,std_accuracy\n";
  json detail = json::array();
  bool any_failed = false;

  for (double value : cfg.sweep_values) {
    RunConfig point = cfg;
    try {
      if (cfg.sweep_parameter == "K") {
        if (value < 1.0 || value != std::floor(value)) {
          throw ConfigError("K must be a positive integer");
        }
        point.params.num_anchors = static_cast<int>(value);
      } else if (cfg.sweep_parameter == "lambda1") {
        point.params.lambda1 = value;
      } else if (cfg.sweep_parameter == "lambda2") {
        point.params.lambda2 = value;
      } else {
        point.params.eta = value;
      }
      point.validate_common();
      BenchmarkReport report = run_benchmark(data, benchmark_options(point));
      for (const auto& m : report.methods) {
        csv << cfg.sweep_parameter << ',' << value << ',' << m.method << ','
            << m.mean_accuracy << ',' << m.std_accuracy << '\n';
      }
      json entry = deterministic_benchmark_json(report);
      entry["value"] = value;
      detail.push_back(std::move(entry));
    } catch (const ConfigError& e) {
      any_failed = true;
      print_error(kConfigError, "config",
                  "sweep value " + std::to_string(value) + ": " + e.what());
    }
  }

  write_text_file(cfg.out + ".csv", csv.str());
  write_text_file(cfg.out + ".json", detail.dump(2) + "\n");
  return any_failed ? kConfigError : kOk;
}

int cmd_gradcheck(const RunConfig& cfg) {
  GradcheckOutcome outcome = run_gradcheck(cfg.gradcheck);
  std::cout << "gradient max relative error: " << outcome.max_grad_rel_error
            << " (tolerance " << cfg.gradcheck.grad_tolerance << ")\n"
            << "retract(W,0) max deviation:  " << outcome.max_retract_zero_error
            << "\n"
            << "projection max asymmetry:    "
            << outcome.max_projection_asymmetry << "\n"
            << "retraction min eigenvalue:   "
            << outcome.min_retract_eigenvalue << "\n"
            << "identity transport max err:  "
            << outcome.max_transport_identity_error << "\n";
  if (!outcome.passed) {
    print_error(kCheckFailed, "check",
                "gradcheck failed (worst instance seed " +
                    std::to_string(outcome.worst_instance_seed) + ")");
    return kCheckFailed;
  }
  std::cout << "gradcheck passed\n";
  return kOk;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"MDaML: multimodal-aware weakly supervised metric learning"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  // Flags are applied after the config file: precedence flags > file >
  // defaults.
  struct FlagValues {
    std::string data, label, out, parameter;
    int k = 0, trials = 0, threads = 0;
    double lambda1 = 0, lambda2 = 0, eta = 0;
    std::uint64_t seed = 0;
    std::vector<double> values;
  } fv;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--data", fv.data, "dataset CSV path");
    sub->add_option("--label", fv.label, "label column (name or index)");
    sub->add_option("--k", fv.k, "number of locality centers K");
    sub->add_option("--lambda1", fv.lambda1, "triplet-loss weight");
    sub->add_option("--lambda2", fv.lambda2, "Frobenius ridge weight");
    sub->add_option("--eta", fv.eta, "weight-smoothing exponent (> 1)");
    sub->add_option("--trials", fv.trials, "number of random split trials");
    sub->add_option("--seed", fv.seed, "base RNG seed");
    sub->add_option("--out", fv.out, "output path (train: file, else stem)");
    sub->add_option("--threads", fv.threads, "worker pool size (0 = auto)");
    sub->add_flag("--fixed-weights", "freeze triplet weights at 1 (ablation)");
    sub->add_flag("--cross-product-triplets",
                  "use the full similar x dissimilar cross product");
    sub->add_flag("--no-header", "CSV has no header row");
    sub->add_flag("--no-stratify", "plain random splits");
    sub->add_flag("--tune", "grid-search K and lambda1 on trial 0");
  };

  CLI::App* train = app.add_subcommand("train", "fit a metric on a CSV");
  CLI::App* bench =
      app.add_subcommand("benchmark", "multi-trial accuracy benchmark");
  CLI::App* sweep =
      app.add_subcommand("sweep", "benchmark across one parameter's values");
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "verify gradients and manifold ops");
  for (CLI::App* sub : {train, bench, sweep, gradcheck}) add_common(sub);

  sweep->add_option("--parameter", fv.parameter,
                    "one of K, lambda1, lambda2, eta");
  sweep->add_option("--values", fv.values, "values to sweep");
  gradcheck->add_option("--instances", cfg.gradcheck.instances,
                        "number of random instances");
  gradcheck->add_flag("--corrupt-gradient", cfg.gradcheck.corrupt_gradient,
                      "test hook: corrupt the gradient (must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    print_error(kConfigError, "config", e.what());
    return kConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!config_path.empty()) apply_config_file(config_path, cfg);

    if (sub->count("--data")) cfg.data_path = fv.data;
    if (sub->count("--label")) cfg.label = fv.label;
    if (sub->count("--k")) cfg.params.num_anchors = fv.k;
    if (sub->count("--lambda1")) cfg.params.lambda1 = fv.lambda1;
    if (sub->count("--lambda2")) cfg.params.lambda2 = fv.lambda2;
    if (sub->count("--eta")) cfg.params.eta = fv.eta;
    if (sub->count("--trials")) cfg.split.trials = fv.trials;
    if (sub->count("--seed")) {
      cfg.split.seed = fv.seed;
      cfg.params.seed = fv.seed;
      cfg.gradcheck.seed = fv.seed;
    }
    if (sub->count("--out")) cfg.out = fv.out;
    if (sub->count("--threads")) cfg.threads = fv.threads;
    if (sub->count("--fixed-weights")) cfg.fixed_weights = true;
    if (sub->count("--cross-product-triplets")) {
      cfg.triplets.cross_product = true;
    }
    if (sub->count("--no-header")) cfg.has_header = false;
    if (sub->count("--no-stratify")) cfg.split.stratified = false;
    if (sub->count("--tune")) cfg.tune = true;
    if (sub->count("--parameter")) cfg.sweep_parameter = fv.parameter;
    if (sub->count("--values")) cfg.sweep_values = fv.values;

    if (sub == train) return cmd_train(cfg);
    if (sub == bench) return cmd_benchmark(cfg);
    if (sub == sweep) return cmd_sweep(cfg);
    return cmd_gradcheck(cfg);
  } catch (const ConfigError& e) {
    print_error(kConfigError, "config", e.what());
    return kConfigError;
  } catch (const DataError& e) {
    print_error(kDataError, "data", e.what());
    return kDataError;
  } catch (const NumericError& e) {
    print_error(kNumericError, "numeric", e.what());
    return kNumericError;
  } catch (const std::exception& e) {
    print_error(kNumericError, "internal", e.what());
    return kNumericError;
  }
}

}  // namespace mdaml::cli
