#include "mdaml/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdaml/rng.hpp"

namespace mdaml {

RandomInstance random_instance(std::uint64_t seed, int max_dim,
                               int max_samples, int max_anchors,
                               int max_triplets) {
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> dim_dist(2, max_dim);
  const int d = dim_dist(rng);
  std::uniform_int_distribution<int> n_dist(std::max(4, max_anchors + 1),
                                            max_samples);
  const int n = n_dist(rng);
  std::uniform_int_distribution<int> k_dist(1, max_anchors);
  const int k = k_dist(rng);
  std::uniform_int_distribution<int> t_dist(1, max_triplets);
  const int t = t_dist(rng);

  std::normal_distribution<double> gauss(0.0, 1.0);
  RandomInstance inst{Dataset{}, AnchorModel{}, TripletSet{}, MdamlParams{},
                      random_spd(d, rng, 0.5, 2.5)};

  inst.data.features.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) inst.data.features(i, j) = gauss(rng);
  }

  inst.anchors.centers.resize(k, d);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < d; ++j) inst.anchors.centers(i, j) = gauss(rng);
  }
  std::uniform_real_distribution<double> wdist(0.1, 1.0);
  inst.anchors.weights.resize(n, k);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      inst.anchors.weights(i, c) = wdist(rng);
      sum += inst.anchors.weights(i, c);
    }
    inst.anchors.weights.row(i) /= sum;
  }

  std::uniform_int_distribution<int> idx(0, n - 1);
  std::vector<Triplet> trips;
  while (static_cast<int>(trips.size()) < t) {
    int a = idx(rng), j = idx(rng), r = idx(rng);
    if (a == j || a == r) continue;
    trips.push_back({a, j, r});
  }
  inst.trips = TripletSet(std::move(trips), n);

  std::uniform_real_distribution<double> l1(0.2, 5.0);
  std::uniform_real_distribution<double> eta(1.5, 4.0);
  inst.params.num_anchors = k;
  inst.params.lambda1 = l1(rng);
  inst.params.lambda2 = 1e-4;
  inst.params.eta = eta(rng);
  return inst;
}

Eigen::MatrixXd finite_difference_gradient(const SpdMatrix& m,
                                           const AnchorModel& anchors,
                                           const Dataset& data,
                                           const TripletSet& trips,
                                           const MdamlParams& p, double h) {
  const int d = m.dim();
  Eigen::MatrixXd grad(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      Eigen::MatrixXd dir = Eigen::MatrixXd::Zero(d, d);
      dir(a, b) = 1.0;
      dir(b, a) = 1.0;
      const double fp =
          objective(SpdMatrix(m.matrix() + h * dir), anchors, data, trips, p);
      const double fm =
          objective(SpdMatrix(m.matrix() - h * dir), anchors, data, trips, p);
      const double slope = (fp - fm) / (2.0 * h);
      // slope = ⟨G, dir⟩, which is G(a,a) on the diagonal and 2·G(a,b) off it.
      grad(a, b) = grad(b, a) = (a == b) ? slope : slope / 2.0;
    }
  }
  return grad;
}

GradcheckOutcome run_gradcheck(const GradcheckOptions& opt) {
  GradcheckOutcome out;
  out.min_retract_eigenvalue = std::numeric_limits<double>::infinity();

  for (int i = 0; i < opt.instances; ++i) {
    const std::uint64_t iseed = derive_seed(opt.seed, i);
    RandomInstance inst = random_instance(iseed);
    Eigen::MatrixXd analytic = euclidean_gradient(
        inst.metric, inst.anchors, inst.data, inst.trips, inst.params);
    if (opt.corrupt_gradient) {
      analytic(0, 0) += 0.05 * (1.0 + std::abs(analytic(0, 0)));
    }
    Eigen::MatrixXd numeric = finite_difference_gradient(
        inst.metric, inst.anchors, inst.data, inst.trips, inst.params);
    const double rel =
        (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12);
    if (rel > out.max_grad_rel_error) {
      out.max_grad_rel_error = rel;
      out.worst_instance_seed = iseed;
    }
  }
  out.gradient_ok = out.max_grad_rel_error < opt.grad_tolerance;

  Rng rng = make_rng(opt.seed, 0x6d'61'6e);
  for (int i = 0; i < opt.manifold_cases; ++i) {
    const int d = 2 + (i % 9);  // d ∈ {2,…,10}
    SpdMatrix w = random_spd(d, rng);

    TangentVector zero(Eigen::MatrixXd::Zero(d, d), w);
    out.max_retract_zero_error =
        std::max(out.max_retract_zero_error,
                 (retract(w, zero).matrix() - w.matrix()).cwiseAbs().maxCoeff());

    Eigen::MatrixXd g(d, d);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) g(r, c) = gauss(rng);
    }
    Eigen::MatrixXd projected = project_to_tangent(w, g).data();
    out.max_projection_asymmetry =
        std::max(out.max_projection_asymmetry,
                 (projected - projected.transpose()).cwiseAbs().maxCoeff());

    std::uniform_real_distribution<double> norm_dist(0.0, 10.0);
    TangentVector z = random_tangent(w, rng, norm_dist(rng));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(retract(w, z).matrix());
    out.min_retract_eigenvalue =
        std::min(out.min_retract_eigenvalue, es.eigenvalues().minCoeff());

    TangentVector moved = parallel_transport(z, w, w);
    out.max_transport_identity_error =
        std::max(out.max_transport_identity_error,
                 (moved.data() - z.data()).cwiseAbs().maxCoeff());
  }
  out.manifold_ok = out.max_retract_zero_error <= 1e-12 &&
                    out.max_projection_asymmetry <= 1e-10 &&
                    out.min_retract_eigenvalue > 0.0 &&
                    out.max_transport_identity_error <= 1e-12;
  out.passed = out.gradient_ok && out.manifold_ok;
  return out;
}

}  // namespace mdaml
