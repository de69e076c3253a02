#pragma once

#include <cstdint>

#include "mdaml/model.hpp"

namespace mdaml {

struct GradcheckOptions {
  int instances = 20;
  std::uint64_t seed = 7;
  double grad_tolerance = 1e-5;
  int manifold_cases = 100;
  /// Test hook: perturbs the analytic gradient so the check must fail.
  bool corrupt_gradient = false;
};

struct GradcheckOutcome {
  double max_grad_rel_error = 0.0;
  double max_retract_zero_error = 0.0;
  double max_projection_asymmetry = 0.0;
  double min_retract_eigenvalue = 0.0;
  double max_transport_identity_error = 0.0;
  std::uint64_t worst_instance_seed = 0;
  bool gradient_ok = false;
  bool manifold_ok = false;
  bool passed = false;
};

/// Central finite differences of the objective over symmetric coordinate
/// directions versus the analytic Euclidean gradient, on random small
/// instances, plus the manifold property suite (retraction centering,
/// projection symmetry, retraction positive-definiteness, identity
/// transport).
GradcheckOutcome run_gradcheck(const GradcheckOptions& opt);

/// Finite-difference gradient of the objective at M (symmetric coordinate
/// perturbations, step h).
Eigen::MatrixXd finite_difference_gradient(const SpdMatrix& m,
                                           const AnchorModel& anchors,
                                           const Dataset& data,
                                           const TripletSet& trips,
                                           const MdamlParams& p,
                                           double h = 1e-5);

/// A random small problem instance for gradient checking.
struct RandomInstance {
  Dataset data;
  AnchorModel anchors;
  TripletSet trips;
  MdamlParams params;
  SpdMatrix metric;
};

RandomInstance random_instance(std::uint64_t seed, int max_dim = 5,
                               int max_samples = 20, int max_anchors = 3,
                               int max_triplets = 15);

}  // namespace mdaml
