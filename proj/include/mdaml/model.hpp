#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mdaml/data.hpp"
#include "mdaml/rcgd.hpp"
#include "mdaml/spd.hpp"

namespace mdaml {

/// One relative constraint: `anchor` is more similar to `similar` than to
/// `dissimilar`.
struct Triplet {
  int anchor = 0;
  int similar = 0;
  int dissimilar = 0;
};

class TripletSet {
 public:
  TripletSet() = default;
  /// Validates indices against the sample count: all in [0, N),
  /// anchor ≠ similar and anchor ≠ dissimilar.
  TripletSet(std::vector<Triplet> triplets, int num_samples);

  const std::vector<Triplet>& triplets() const { return triplets_; }
  int size() const { return static_cast<int>(triplets_.size()); }
  bool empty() const { return triplets_.empty(); }

 private:
  std::vector<Triplet> triplets_;
};

/// K locality centers plus the N×K simplex weights tying samples to them.
struct AnchorModel {
  Eigen::MatrixXd centers;  // K×d
  Eigen::MatrixXd weights;  // N×K, each row strictly positive, summing to 1

  int num_anchors() const { return static_cast<int>(centers.rows()); }

  /// Throws std::invalid_argument when a weight is non-positive or a row
  /// strays from the simplex by more than 1e-10.
  void validate() const;
};

struct MdamlParams {
  int num_anchors = 0;     // K; must be supplied
  double lambda1 = 0.0;    // triplet-loss trade-off; must be supplied
  double lambda2 = 1e-4;   // Frobenius ridge
  double eta = 3.0;        // weight-smoothing exponent, > 1
  int outer_max = 20;
  double outer_tol = 1e-4;  // relative objective decrease
  RcgdConfig rcgd;
  std::uint64_t seed = 0;
  /// Freezes every triplet weight at 1 (clustering weights still learned).
  bool fixed_triplet_weights = false;
  /// Drops the triplet term entirely; exposes the lambda1 = 0 limit.
  bool clustering_only = false;

  void validate() const;  // throws ConfigError
};

struct FitReport {
  /// Objective at initialization followed by one value per outer iteration.
  std::vector<double> objective_per_outer;
  int outer_iters = 0;
  bool converged = false;
  std::vector<RcgdTrace> rcgd_traces;
  double wall_time_seconds = 0.0;
};

/// Squared Mahalanobis distance (x−y)ᵀ M (x−y).
double mahalanobis_sq(const SpdMatrix& m, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y);

/// Smooth hinge: 0 for x ≥ 1, ½ − x for x ≤ 0, ½(1−x)² between.
double smooth_hinge(double x);
/// Its derivative: 0 for x ≥ 1, −1 for x ≤ 0, x − 1 between.
double smooth_hinge_deriv(double x);

/// Full objective
///   (1/NK) Σᵢₖ wᵢₖ^η d²_M(xᵢ, cₖ)
/// + (λ₁/KT) Σₖ Σₜ wᵢₖ^η wⱼₖ^η ℓ(δₜ)
/// + (λ₂/2) ‖M‖²_F,
/// with δₜ = d²_M(xᵢ, x_r) − d²_M(xᵢ, xⱼ) per triplet.
double objective(const SpdMatrix& m, const AnchorModel& anchors,
                 const Dataset& data, const TripletSet& trips,
                 const MdamlParams& p);

/// Closed-form center update cₖ = Σᵢ wᵢₖ^η xᵢ / Σᵢ wᵢₖ^η (independent of M).
Eigen::MatrixXd update_centers(const SpdMatrix& m,
                               const Eigen::MatrixXd& weights,
                               const Dataset& data, double eta);

/// Per-sample coefficients of the weight sub-problem min Σₖ wᵢₖ^η Fᵢₖ,
/// floored at 1e-12.
Eigen::VectorXd compute_F(const SpdMatrix& m, const AnchorModel& anchors,
                          const Dataset& data, const TripletSet& trips,
                          int sample, const MdamlParams& p);

/// Closed-form simplex minimizer wₖ ∝ (1/Fₖ)^{1/(η−1)} for one sample row.
Eigen::VectorXd update_weights_row(const Eigen::VectorXd& f, double eta);

/// Row-wise application of the closed-form weight update to an N×K matrix.
Eigen::MatrixXd update_weights(const Eigen::MatrixXd& f, double eta);

/// Euclidean gradient of the objective with respect to M:
/// ∇₁ + λ₁∇₂ + λ₂M with the outer-product sums over clusters and triplets.
Eigen::MatrixXd euclidean_gradient(const SpdMatrix& m,
                                   const AnchorModel& anchors,
                                   const Dataset& data, const TripletSet& trips,
                                   const MdamlParams& p);

struct FitResult {
  SpdMatrix metric;
  AnchorModel anchors;
  FitReport report;
};

/// Alternating minimization: GMM initialization, then cycles of the center
/// update, a Gauss–Seidel sweep of weight rows, and an RCGD metric step,
/// until the relative objective decrease falls below outer_tol. The
/// objective is re-evaluated after every sub-update and must never increase
/// beyond 1e-9 slack (NumericError otherwise).
FitResult fit(const Dataset& data, const TripletSet& trips,
              const MdamlParams& p);

}  // namespace mdaml
