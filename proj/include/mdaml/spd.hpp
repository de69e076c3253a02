#pragma once

#include <Eigen/Dense>
#include <utility>

#include "mdaml/rng.hpp"

namespace mdaml {

/// Symmetric part of a square matrix, ½(A + Aᵀ).
/// Throws std::invalid_argument for non-square input.
Eigen::MatrixXd sym_part(const Eigen::MatrixXd& a);

/// A symmetric positive-definite matrix. The constructor rejects matrices with
/// elementwise asymmetry above 1e-12 or a non-positive spectrum, and stores an
/// exactly symmetric copy so downstream products stay on-manifold.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd m);

  static SpdMatrix identity(int dim);

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  double operator()(int row, int col) const { return m_(row, col); }

 private:
  Eigen::MatrixXd m_;
};

/// A symmetric matrix tangent to the SPD manifold at a given base point.
/// Carries its own copy of the base point so retraction and transport can
/// verify they are applied where the vector lives.
class TangentVector {
 public:
  TangentVector(Eigen::MatrixXd data, const SpdMatrix& base);

  const Eigen::MatrixXd& data() const { return data_; }
  const Eigen::MatrixXd& base() const { return base_; }
  int dim() const { return static_cast<int>(data_.rows()); }

  double norm() const { return data_.norm(); }
  TangentVector scaled(double factor) const;

 private:
  Eigen::MatrixXd data_;
  Eigen::MatrixXd base_;
};

/// Frobenius inner product ⟨A, B⟩ = Σ aᵢⱼ bᵢⱼ of two tangent vectors at the
/// same base point.
double frobenius_inner(const TangentVector& a, const TangentVector& b);

/// Projects an ambient (Euclidean) gradient G onto the tangent space at W:
/// W · ½(G + Gᵀ) · W. Output is symmetrized before construction.
TangentVector project_to_tangent(const SpdMatrix& w, const Eigen::MatrixXd& g);

/// Matrix exponential of a symmetric matrix via eigendecomposition
/// S = QΛQᵀ ↦ Q exp(Λ) Qᵀ. Throws std::invalid_argument if the input is
/// asymmetric beyond 1e-10; the result is SPD by construction.
SpdMatrix expm_sym(const Eigen::MatrixXd& s);

/// Principal logarithm of an SPD matrix, Q log(Λ) Qᵀ.
Eigen::MatrixXd logm_spd(const SpdMatrix& w);

/// (W^{1/2}, W^{-1/2}) via the self-adjoint eigendecomposition. Throws
/// NumericError when the spectrum spans more than 1e12 (relative eigenvalue
/// floor), since the inverse square root is then meaningless in double
/// precision.
std::pair<SpdMatrix, SpdMatrix> sqrt_and_invsqrt(const SpdMatrix& w);

/// Exponential-map retraction W^{1/2} expm(W^{-1/2} Z W^{-1/2}) W^{1/2}.
/// Requires Z to be tangent at W (base-point mismatch throws).
SpdMatrix retract(const SpdMatrix& w, const TangentVector& z);

/// AIRM parallel transport of Z from `from` to `to`:  E Z Eᵀ with
/// E = (to · from⁻¹)^{1/2}, computed through the symmetric product
/// from^{-1/2} · to · from^{-1/2}.
TangentVector parallel_transport(const TangentVector& z, const SpdMatrix& from,
                                 const SpdMatrix& to);

/// Vector transport used by the conjugate-gradient solver. `airm` is exact
/// parallel transport; `reprojection` re-projects the raw matrix at the
/// target point, which is cheaper and sufficient for a vector transport.
enum class TransportRule { airm, reprojection };

TangentVector transport(const TangentVector& z, const SpdMatrix& from,
                        const SpdMatrix& to, TransportRule rule);

/// Random SPD matrix with eigenvalues uniform in [eig_min, eig_max] and a
/// Haar-ish random orthogonal eigenbasis. Deterministic per RNG state.
SpdMatrix random_spd(int dim, Rng& rng, double eig_min = 0.5,
                     double eig_max = 2.5);

/// Random symmetric tangent vector at `base` with Frobenius norm `norm`.
TangentVector random_tangent(const SpdMatrix& base, Rng& rng, double norm);

}  // namespace mdaml
