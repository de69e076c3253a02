#include "mdaml/model.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "mdaml/errors.hpp"
#include "mdaml/gmm.hpp"

namespace mdaml {

namespace {

constexpr double kFFloor = 1e-12;
constexpr double kDescentSlack = 1e-9;

void require_consistent(const SpdMatrix& m, const AnchorModel& anchors,
                        const Dataset& data, const MdamlParams& p) {
  if (m.dim() != data.dim()) {
    throw std::invalid_argument("metric dimension does not match data");
  }
  if (anchors.centers.rows() != p.num_anchors ||
      anchors.centers.cols() != data.dim()) {
    throw std::invalid_argument("anchor centers have wrong shape");
  }
  if (anchors.weights.rows() != data.num_samples() ||
      anchors.weights.cols() != p.num_anchors) {
    throw std::invalid_argument("anchor weights have wrong shape");
  }
}

bool triplet_term_active(const TripletSet& trips, const MdamlParams& p) {
  if (p.clustering_only) return false;
  if (trips.empty()) {
    throw DataError("objective: empty triplet set (T = 0)");
  }
  return true;
}

Eigen::MatrixXd weights_pow(const Eigen::MatrixXd& weights, double eta) {
  return weights.array().pow(eta);
}

/// δₜ = d²_M(x_a, x_r) − d²_M(x_a, x_j) for one triplet.
double triplet_margin(const SpdMatrix& m, const Dataset& data,
                      const Triplet& t) {
  Eigen::VectorXd dr = data.features.row(t.anchor) -
                       data.features.row(t.dissimilar);
  Eigen::VectorXd dj = data.features.row(t.anchor) -
                       data.features.row(t.similar);
  return dr.dot(m.matrix() * dr) - dj.dot(m.matrix() * dj);
}

}  // namespace

TripletSet::TripletSet(std::vector<Triplet> triplets, int num_samples)
    : triplets_(std::move(triplets)) {
  for (size_t t = 0; t < triplets_.size(); ++t) {
    const Triplet& tr = triplets_[t];
    auto in_range = [num_samples](int i) { return i >= 0 && i < num_samples; };
    if (!in_range(tr.anchor) || !in_range(tr.similar) ||
        !in_range(tr.dissimilar)) {
      throw DataError("triplet " + std::to_string(t) +
                      ": index out of range [0," +
                      std::to_string(num_samples) + ")");
    }
    if (tr.anchor == tr.similar || tr.anchor == tr.dissimilar) {
      throw DataError("triplet " + std::to_string(t) +
                      ": anchor coincides with a partner index");
    }
  }
}

void AnchorModel::validate() const {
  if (weights.rows() == 0 || centers.rows() != weights.cols()) {
    throw std::invalid_argument("anchor model: inconsistent shapes");
  }
  if ((weights.array() <= 0.0).any()) {
    throw std::invalid_argument("anchor model: weights must be positive");
  }
  Eigen::VectorXd sums = weights.rowwise().sum();
  if (((sums.array() - 1.0).abs() > 1e-10).any()) {
    throw std::invalid_argument(
        "anchor model: weight rows must sum to 1 within 1e-10");
  }
}

void MdamlParams::validate() const {
  if (num_anchors < 1) throw ConfigError("params: K must be >= 1");
  if (!(eta > 1.0)) throw ConfigError("params: eta must be > 1");
  if (!clustering_only && !(lambda1 > 0.0)) {
    throw ConfigError("params: lambda1 must be > 0");
  }
  if (!(lambda2 > 0.0)) throw ConfigError("params: lambda2 must be > 0");
  if (outer_max < 1) throw ConfigError("params: outer_max must be positive");
  if (!(outer_tol > 0.0)) throw ConfigError("params: outer_tol must be > 0");
  rcgd.validate();
}

double mahalanobis_sq(const SpdMatrix& m, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() != m.dim()) {
    throw std::invalid_argument("mahalanobis_sq: dimension mismatch");
  }
  Eigen::VectorXd d = x - y;
  return std::max(0.0, d.dot(m.matrix() * d));
}

double smooth_hinge(double x) {
  if (x >= 1.0) return 0.0;
  if (x <= 0.0) return 0.5 - x;
  const double u = 1.0 - x;
  return 0.5 * u * u;
}

double smooth_hinge_deriv(double x) {
  if (x >= 1.0) return 0.0;
  if (x <= 0.0) return -1.0;
  return x - 1.0;
}

double objective(const SpdMatrix& m, const AnchorModel& anchors,
                 const Dataset& data, const TripletSet& trips,
                 const MdamlParams& p) {
  require_consistent(m, anchors, data, p);
  const int n = data.num_samples();
  const int k = p.num_anchors;

  Eigen::MatrixXd wpow = weights_pow(anchors.weights, p.eta);

  double cluster_term = 0.0;
  for (int c = 0; c < k; ++c) {
    Eigen::MatrixXd diff =
        data.features.rowwise() - anchors.centers.row(c);
    // Σᵢ wᵢ꜀^η (xᵢ−c꜀)ᵀ M (xᵢ−c꜀)
    cluster_term +=
        (wpow.col(c).array() *
         ((diff * m.matrix()).cwiseProduct(diff)).rowwise().sum().array())
            .sum();
  }
  cluster_term /= static_cast<double>(n) * k;

  double triplet_term = 0.0;
  if (triplet_term_active(trips, p)) {
    for (const Triplet& t : trips.triplets()) {
      const double loss = smooth_hinge(triplet_margin(m, data, t));
      const double pair_weight =
          p.fixed_triplet_weights
              ? static_cast<double>(k)
              : wpow.row(t.anchor).dot(wpow.row(t.similar));
      triplet_term += pair_weight * loss;
    }
    triplet_term *= p.lambda1 / (static_cast<double>(k) * trips.size());
  }

  const double ridge = 0.5 * p.lambda2 * m.matrix().squaredNorm();
  return cluster_term + triplet_term + ridge;
}

Eigen::MatrixXd update_centers(const SpdMatrix& m,
                               const Eigen::MatrixXd& weights,
                               const Dataset& data, double eta) {
  (void)m;  // the metric cancels in the closed form
  if (weights.rows() != data.num_samples()) {
    throw std::invalid_argument("update_centers: weight/sample mismatch");
  }
  if ((weights.array() <= 0.0).any()) {
    throw std::invalid_argument("update_centers: weights must be positive");
  }
  Eigen::MatrixXd wpow = weights_pow(weights, eta);
  Eigen::VectorXd mass = wpow.colwise().sum();
  if ((mass.array() <= 0.0).any()) {
    throw NumericError("update_centers: zero weight mass for a center");
  }
  Eigen::MatrixXd centers = wpow.transpose() * data.features;
  centers.array().colwise() /= mass.array();
  return centers;
}

Eigen::VectorXd compute_F(const SpdMatrix& m, const AnchorModel& anchors,
                          const Dataset& data, const TripletSet& trips,
                          int sample, const MdamlParams& p) {
  require_consistent(m, anchors, data, p);
  if (sample < 0 || sample >= data.num_samples()) {
    throw std::invalid_argument("compute_F: sample index out of range");
  }
  const int k = p.num_anchors;
  Eigen::VectorXd f(k);
  Eigen::VectorXd x = data.features.row(sample);
  for (int c = 0; c < k; ++c) {
    f(c) = mahalanobis_sq(m, x, anchors.centers.row(c)) /
           data.num_samples();
  }

  const bool weighted_triplets =
      !p.clustering_only && !p.fixed_triplet_weights && !trips.empty();
  if (weighted_triplets) {
    Eigen::MatrixXd wpow = weights_pow(anchors.weights, p.eta);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
    for (const Triplet& t : trips.triplets()) {
      if (t.anchor != sample && t.similar != sample) continue;
      const double loss = smooth_hinge(triplet_margin(m, data, t));
      const int partner = (t.anchor == sample) ? t.similar : t.anchor;
      acc += loss * wpow.row(partner).transpose();
    }
    f += (p.lambda1 / trips.size()) * acc;
  }

  return f.cwiseMax(kFFloor);
}

Eigen::VectorXd update_weights_row(const Eigen::VectorXd& f, double eta) {
  if (!(eta > 1.0)) {
    throw ConfigError("update_weights: eta must be > 1");
  }
  if (!f.allFinite()) {
    throw NumericError("update_weights: non-finite F value");
  }
  if ((f.array() <= 0.0).any()) {
    throw std::invalid_argument("update_weights: F values must be positive");
  }
  // wₖ ∝ Fₖ^{-1/(η−1)}; dividing by min(F) first keeps the powers in range
  // for exponents far from 1.
  const double exponent = 1.0 / (eta - 1.0);
  Eigen::ArrayXd scaled = f.array() / f.minCoeff();
  Eigen::ArrayXd unnorm =
      scaled.pow(-exponent).max(std::numeric_limits<double>::min());
  return (unnorm / unnorm.sum()).matrix();
}

Eigen::MatrixXd update_weights(const Eigen::MatrixXd& f, double eta) {
  Eigen::MatrixXd out(f.rows(), f.cols());
  for (int i = 0; i < f.rows(); ++i) {
    out.row(i) = update_weights_row(f.row(i), eta).transpose();
  }
  return out;
}

Eigen::MatrixXd euclidean_gradient(const SpdMatrix& m,
                                   const AnchorModel& anchors,
                                   const Dataset& data, const TripletSet& trips,
                                   const MdamlParams& p) {
  require_consistent(m, anchors, data, p);
  const int n = data.num_samples();
  const int k = p.num_anchors;
  const int d = data.dim();
  Eigen::MatrixXd wpow = weights_pow(anchors.weights, p.eta);

  Eigen::MatrixXd grad1 = Eigen::MatrixXd::Zero(d, d);
  for (int c = 0; c < k; ++c) {
    Eigen::MatrixXd diff = data.features.rowwise() - anchors.centers.row(c);
    grad1.noalias() +=
        diff.transpose() * wpow.col(c).asDiagonal() * diff;
  }
  grad1 /= static_cast<double>(n) * k;

  Eigen::MatrixXd grad2 = Eigen::MatrixXd::Zero(d, d);
  if (triplet_term_active(trips, p)) {
    for (const Triplet& t : trips.triplets()) {
      const double slope = smooth_hinge_deriv(triplet_margin(m, data, t));
      if (slope == 0.0) continue;
      const double pair_weight =
          p.fixed_triplet_weights
              ? static_cast<double>(k)
              : wpow.row(t.anchor).dot(wpow.row(t.similar));
      Eigen::VectorXd dr =
          data.features.row(t.anchor) - data.features.row(t.dissimilar);
      Eigen::VectorXd dj =
          data.features.row(t.anchor) - data.features.row(t.similar);
      const double c = pair_weight * slope;
      grad2.noalias() += c * (dr * dr.transpose());
      grad2.noalias() -= c * (dj * dj.transpose());
    }
    grad2 *= p.lambda1 / (static_cast<double>(k) * trips.size());
  }

  return sym_part(grad1 + grad2 + p.lambda2 * m.matrix());
}

FitResult fit(const Dataset& data, const TripletSet& trips,
              const MdamlParams& p) {
  p.validate();
  data.validate();
  if (data.num_samples() < p.num_anchors) {
    throw DataError("fit: need at least K samples");
  }
  if (!p.clustering_only && trips.empty()) {
    throw DataError("fit: empty triplet set");
  }

  const auto t_start = std::chrono::steady_clock::now();

  AnchorModel anchors = gmm_init(data, p.num_anchors, p.seed);
  SpdMatrix metric = SpdMatrix::identity(data.dim());

  FitReport report;
  double f_prev = objective(metric, anchors, data, trips, p);
  report.objective_per_outer.push_back(f_prev);

  auto check_descent = [](double before, double after, const char* step) {
    if (!(after <= before + kDescentSlack)) {
      throw NumericError(std::string("fit: objective increased after ") +
                         step + " update (" + std::to_string(before) +
                         " -> " + std::to_string(after) + ")");
    }
  };

  for (int outer = 1; outer <= p.outer_max; ++outer) {
    anchors.centers = update_centers(metric, anchors.weights, data, p.eta);
    const double f_centers = objective(metric, anchors, data, trips, p);
    check_descent(f_prev, f_centers, "center");

    // Gauss–Seidel sweep: each row uses the freshest other rows.
    for (int i = 0; i < data.num_samples(); ++i) {
      Eigen::VectorXd f_row = compute_F(metric, anchors, data, trips, i, p);
      anchors.weights.row(i) = update_weights_row(f_row, p.eta).transpose();
    }
    const double f_weights = objective(metric, anchors, data, trips, p);
    check_descent(f_centers, f_weights, "weight");

    auto cost = [&](const SpdMatrix& m) {
      return objective(m, anchors, data, trips, p);
    };
    auto egrad = [&](const SpdMatrix& m) {
      return euclidean_gradient(m, anchors, data, trips, p);
    };
    RcgdResult inner = rcgd_minimize(metric, cost, egrad, p.rcgd);
    metric = std::move(inner.minimizer);
    report.rcgd_traces.push_back(std::move(inner.trace));

    const double f_metric = objective(metric, anchors, data, trips, p);
    check_descent(f_weights, f_metric, "metric");

    report.objective_per_outer.push_back(f_metric);
    report.outer_iters = outer;

    const double rel =
        (f_prev - f_metric) / std::max(std::abs(f_prev), 1e-12);
    f_prev = f_metric;
    if (rel < p.outer_tol) {
      report.converged = true;
      break;
    }
  }

  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return FitResult{std::move(metric), std::move(anchors), std::move(report)};
}

}  // namespace mdaml
