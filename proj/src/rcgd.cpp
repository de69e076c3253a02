#include "mdaml/rcgd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "mdaml/errors.hpp"

namespace mdaml {

void RcgdConfig::validate() const {
  if (max_iters < 1) throw ConfigError("rcgd: max_iters must be positive");
  if (!(grad_tol > 0.0)) throw ConfigError("rcgd: grad_tol must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
    throw ConfigError("rcgd: armijo_c must be in (0,1)");
  }
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ConfigError("rcgd: backtrack_factor must be in (0,1)");
  }
  if (max_backtracks < 1) {
    throw ConfigError("rcgd: max_backtracks must be positive");
  }
  if (!(initial_step > 0.0)) {
    throw ConfigError("rcgd: initial_step must be positive");
  }
}

double conjugate_beta(const TangentVector& g_new,
                      const TangentVector& g_old_transported, BetaRule rule) {
  const double denom = frobenius_inner(g_old_transported, g_old_transported);
  if (denom == 0.0) {
    return 0.0;
  }
  switch (rule) {
    case BetaRule::fletcher_reeves:
      return frobenius_inner(g_new, g_new) / denom;
    case BetaRule::polak_ribiere_plus: {
      const double num = frobenius_inner(g_new, g_new) -
                         frobenius_inner(g_new, g_old_transported);
      return std::max(0.0, num / denom);
    }
  }
  return 0.0;
}

std::optional<LineSearchResult> line_search(const SpdMatrix& m,
                                            const TangentVector& h,
                                            const CostFn& cost, double f0,
                                            double slope0,
                                            const RcgdConfig& cfg) {
  if (!(slope0 < 0.0)) {
    throw std::invalid_argument(
        "line_search: slope0 must be negative (descent direction required)");
  }
  double step = cfg.initial_step;
  for (int k = 0; k < cfg.max_backtracks; ++k, step *= cfg.backtrack_factor) {
    try {
      SpdMatrix candidate = retract(m, h.scaled(step));
      double f = cost(candidate);
      if (std::isfinite(f) && f <= f0 + cfg.armijo_c * step * slope0) {
        return LineSearchResult{step, std::move(candidate), f};
      }
    } catch (const NumericError&) {
      // Step overflowed the retraction; shrink and retry.
    }
  }
  return std::nullopt;
}

RcgdResult rcgd_minimize(const SpdMatrix& m0, const CostFn& cost,
                         const EuclideanGradFn& egrad, const RcgdConfig& cfg) {
  cfg.validate();

  SpdMatrix m = m0;
  double f = cost(m);
  if (!std::isfinite(f)) {
    throw NumericError("rcgd: cost is not finite at the initial point");
  }

  RcgdTrace trace;
  std::optional<SpdMatrix> m_prev;
  std::optional<TangentVector> h_prev;
  std::optional<TangentVector> g_prev;

  for (int iter = 0;; ++iter) {
    Eigen::MatrixXd eg = egrad(m);
    if (!eg.allFinite()) {
      throw NumericError("rcgd: non-finite Euclidean gradient at iteration " +
                         std::to_string(iter));
    }
    TangentVector grad = project_to_tangent(m, eg);
    const double grad_norm = grad.norm();

    trace.objective_per_iter.push_back(f);
    trace.grad_norm_per_iter.push_back(grad_norm);
    trace.iters_used = iter;

    if (grad_norm < cfg.grad_tol) {
      trace.converged = true;
      break;
    }
    if (iter >= cfg.max_iters) {
      break;
    }

    TangentVector direction = grad.scaled(-1.0);
    bool is_steepest = true;
    if (h_prev && g_prev) {
      TangentVector h_moved = transport(*h_prev, *m_prev, m, cfg.transport);
      TangentVector g_moved = transport(*g_prev, *m_prev, m, cfg.transport);
      const double beta = cfg.fixed_beta
                              ? *cfg.fixed_beta
                              : conjugate_beta(grad, g_moved, cfg.beta_rule);
      if (beta != 0.0) {
        direction = TangentVector(-grad.data() + beta * h_moved.data(), m);
        is_steepest = false;
      }
    }

    double slope = frobenius_inner(grad, direction);
    if (!(slope < 0.0)) {
      direction = grad.scaled(-1.0);
      slope = -grad_norm * grad_norm;
      is_steepest = true;
    }

    auto accepted = line_search(m, direction, cost, f, slope, cfg);
    if (!accepted && !is_steepest) {
      direction = grad.scaled(-1.0);
      slope = -grad_norm * grad_norm;
      accepted = line_search(m, direction, cost, f, slope, cfg);
    }
    if (!accepted) {
      break;  // no admissible step even along steepest descent
    }

    m_prev = std::move(m);
    h_prev = std::move(direction);
    g_prev = std::move(grad);
    m = std::move(accepted->next);
    f = accepted->cost_next;
    if (!std::isfinite(f)) {
      throw NumericError("rcgd: non-finite cost at iteration " +
                         std::to_string(iter + 1));
    }
  }

  return RcgdResult{std::move(m), std::move(trace)};
}

}  // namespace mdaml
