#include "mdaml/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "mdaml/errors.hpp"
#include "mdaml/rng.hpp"

namespace mdaml {

namespace {

constexpr int kMaxEmIters = 100;
constexpr double kLogLikRelTol = 1e-6;
constexpr double kVarReg = 1e-6;
constexpr double kRespClamp = 1e-8;
constexpr int kMaxReseeds = 10;

/// k-means++ seeding: first center uniform, the rest sampled with
/// probability proportional to the squared distance to the nearest chosen
/// center.
Eigen::MatrixXd kmeanspp_seeds(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd centers(k, x.cols());
  std::uniform_int_distribution<int> first(0, n - 1);
  centers.row(0) = x.row(first(rng));

  Eigen::VectorXd dist2 =
      (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    int chosen = 0;
    if (total > 0.0) {
      double target = unif(rng) * total;
      double running = 0.0;
      chosen = n - 1;
      for (int i = 0; i < n; ++i) {
        running += dist2(i);
        if (running >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);  // all points coincide with a chosen center
    }
    centers.row(c) = x.row(chosen);
    dist2 = dist2.cwiseMin(
        (x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

int farthest_point(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers) {
  Eigen::VectorXd best =
      (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < centers.rows(); ++c) {
    best = best.cwiseMin(
        (x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  int idx = 0;
  best.maxCoeff(&idx);
  return idx;
}

}  // namespace

AnchorModel gmm_init(const Dataset& data, int num_components,
                     std::uint64_t seed) {
  data.validate();
  const int n = data.num_samples();
  const int d = data.dim();
  const int k = num_components;
  if (k < 1) throw ConfigError("gmm: number of components must be >= 1");
  if (n < k) throw DataError("gmm: need at least K samples");

  const Eigen::MatrixXd& x = data.features;
  Rng rng = make_rng(seed, /*stream=*/0x67'6d'6d);

  Eigen::MatrixXd means = kmeanspp_seeds(x, k, rng);
  Eigen::VectorXd global_mean = x.colwise().mean();
  Eigen::VectorXd global_var =
      ((x.rowwise() - global_mean.transpose()).array().square().colwise().sum() /
       n)
          .max(kVarReg);
  Eigen::MatrixXd vars =
      global_var.transpose().replicate(k, 1);            // K×d
  Eigen::VectorXd mix = Eigen::VectorXd::Constant(k, 1.0 / k);

  Eigen::MatrixXd resp(n, k);
  double loglik_prev = -std::numeric_limits<double>::infinity();
  int reseeds = 0;

  for (int iter = 0; iter < kMaxEmIters; ++iter) {
    // E-step: responsibilities via log-sum-exp over diagonal Gaussians.
    Eigen::MatrixXd logp(n, k);
    for (int c = 0; c < k; ++c) {
      Eigen::ArrayXXd centered =
          (x.rowwise() - means.row(c)).array();
      Eigen::ArrayXd quad =
          (centered.square().rowwise() / vars.row(c).array()).rowwise().sum();
      const double log_norm =
          -0.5 * (d * std::log(2.0 * std::numbers::pi) +
                  vars.row(c).array().log().sum());
      logp.col(c) =
          (std::log(mix(c)) + log_norm - 0.5 * quad).matrix();
    }
    Eigen::VectorXd row_max = logp.rowwise().maxCoeff();
    Eigen::ArrayXXd shifted = (logp.colwise() - row_max).array().exp();
    Eigen::VectorXd row_sum = shifted.rowwise().sum();
    resp = (shifted.colwise() / row_sum.array()).matrix();
    const double loglik =
        (row_max.array() + row_sum.array().log()).sum();

    // M-step.
    Eigen::VectorXd mass = resp.colwise().sum();
    bool reseeded = false;
    for (int c = 0; c < k; ++c) {
      if (!(mass(c) > kRespClamp * n)) {
        if (++reseeds > kMaxReseeds) {
          throw DataError(
              "gmm: initialization failed (component repeatedly degenerate)");
        }
        means.row(c) = x.row(farthest_point(x, means));
        vars.row(c) = global_var.transpose();
        mix(c) = 1.0 / k;
        reseeded = true;
      }
    }
    if (reseeded) {
      mix /= mix.sum();
      loglik_prev = -std::numeric_limits<double>::infinity();
      continue;
    }

    for (int c = 0; c < k; ++c) {
      means.row(c) = (resp.col(c).transpose() * x) / mass(c);
      Eigen::ArrayXXd centered = (x.rowwise() - means.row(c)).array();
      vars.row(c) =
          ((centered.square().colwise() * resp.col(c).array()).colwise().sum() /
           mass(c) +
           kVarReg)
              .matrix();
    }
    mix = mass / n;

    if (std::abs(loglik - loglik_prev) <=
        kLogLikRelTol * std::max(1.0, std::abs(loglik_prev))) {
      break;
    }
    loglik_prev = loglik;
  }

  AnchorModel anchors;
  anchors.centers = means;
  anchors.weights = resp.cwiseMax(kRespClamp);
  Eigen::VectorXd sums = anchors.weights.rowwise().sum();
  anchors.weights.array().colwise() /= sums.array();
  anchors.validate();
  return anchors;
}

}  // namespace mdaml
