#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mdaml/spd.hpp"

namespace mdaml {

enum class BetaRule { fletcher_reeves, polak_ribiere_plus };

struct RcgdConfig {
  int max_iters = 100;
  double grad_tol = 1e-5;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  double initial_step = 1.0;
  BetaRule beta_rule = BetaRule::polak_ribiere_plus;
  TransportRule transport = TransportRule::reprojection;
  /// When set, overrides the computed conjugate coefficient with a constant.
  std::optional<double> fixed_beta;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct RcgdTrace {
  std::vector<double> objective_per_iter;
  std::vector<double> grad_norm_per_iter;
  int iters_used = 0;
  bool converged = false;
};

using CostFn = std::function<double(const SpdMatrix&)>;
using EuclideanGradFn = std::function<Eigen::MatrixXd(const SpdMatrix&)>;

/// Conjugate coefficient β from the new gradient and the old gradient
/// transported to the new base point. Fletcher–Reeves: ⟨g,g⟩/⟨g₋,g₋⟩.
/// Polak–Ribière⁺: max(0, ⟨g, g − g₋⟩/⟨g₋,g₋⟩), which restarts automatically.
/// A zero old gradient returns 0 (restart). Frobenius inner products.
double conjugate_beta(const TangentVector& g_new,
                      const TangentVector& g_old_transported, BetaRule rule);

struct LineSearchResult {
  double step = 0.0;
  SpdMatrix next;
  double cost_next = 0.0;
};

/// Armijo backtracking along the retracted ray t ↦ retract(m, t·h).
/// `f0` and `slope0` are the cost and directional derivative at t = 0;
/// slope0 must be negative. Returns the first step
/// initial_step·backtrack_factor^k with cost ≤ f0 + armijo_c·step·slope0,
/// or nullopt when max_backtracks steps are all inadmissible.
std::optional<LineSearchResult> line_search(const SpdMatrix& m,
                                            const TangentVector& h,
                                            const CostFn& cost, double f0,
                                            double slope0,
                                            const RcgdConfig& cfg);

struct RcgdResult {
  SpdMatrix minimizer;
  RcgdTrace trace;
};

/// Riemannian conjugate gradient descent over the SPD manifold.
///
/// Each iteration projects the Euclidean gradient to the tangent space,
/// combines it with the transported previous direction, line-searches along
/// the retraction, and steps. Stops when the Riemannian gradient norm drops
/// below grad_tol or the iteration budget runs out; a failed line search
/// falls back to steepest descent once before terminating.
RcgdResult rcgd_minimize(const SpdMatrix& m0, const CostFn& cost,
                         const EuclideanGradFn& egrad, const RcgdConfig& cfg);

}  // namespace mdaml
