#include "mdaml/spd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mdaml/errors.hpp"

namespace mdaml {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kExpmSymmetryTol = 1e-10;
constexpr double kEigenvalueFloor = 1e-12;  // relative to the largest eigenvalue

double max_asymmetry(const Eigen::MatrixXd& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

void require_square(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is " +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ", expected square");
  }
}

void require_same_base(const TangentVector& z, const SpdMatrix& w,
                       const char* what) {
  if (z.dim() != w.dim() ||
      (z.base() - w.matrix()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw std::invalid_argument(std::string(what) +
                                ": tangent vector is not based at this point");
  }
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_sym(
    const Eigen::MatrixXd& a, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw NumericError(std::string(what) + ": eigendecomposition failed");
  }
  return es;
}

}  // namespace

Eigen::MatrixXd sym_part(const Eigen::MatrixXd& a) {
  require_square(a, "sym_part");
  return 0.5 * (a + a.transpose());
}

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  require_square(m_, "SpdMatrix");
  if (m_.rows() == 0) {
    throw std::invalid_argument("SpdMatrix: dimension must be positive");
  }
  if (!m_.allFinite()) {
    throw NumericError("SpdMatrix: non-finite entries");
  }
  if (max_asymmetry(m_) > kSymmetryTol) {
    throw std::invalid_argument("SpdMatrix: matrix is not symmetric");
  }
  m_ = 0.5 * (m_ + m_.transpose().eval());
  Eigen::LLT<Eigen::MatrixXd> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("SpdMatrix: matrix is not positive definite");
  }
}

SpdMatrix SpdMatrix::identity(int dim) {
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

TangentVector::TangentVector(Eigen::MatrixXd data, const SpdMatrix& base)
    : data_(std::move(data)), base_(base.matrix()) {
  require_square(data_, "TangentVector");
  if (data_.rows() != base_.rows()) {
    throw std::invalid_argument("TangentVector: dimension mismatch with base");
  }
  if (!data_.allFinite()) {
    throw NumericError("TangentVector: non-finite entries");
  }
  if (max_asymmetry(data_) > kSymmetryTol) {
    throw std::invalid_argument("TangentVector: matrix is not symmetric");
  }
  data_ = 0.5 * (data_ + data_.transpose().eval());
}

TangentVector TangentVector::scaled(double factor) const {
  TangentVector out(*this);
  out.data_ *= factor;
  return out;
}

double frobenius_inner(const TangentVector& a, const TangentVector& b) {
  if (a.dim() != b.dim() ||
      (a.base() - b.base()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw std::invalid_argument(
        "frobenius_inner: tangent vectors live at different base points");
  }
  return a.data().cwiseProduct(b.data()).sum();
}

TangentVector project_to_tangent(const SpdMatrix& w, const Eigen::MatrixXd& g) {
  require_square(g, "project_to_tangent");
  if (g.rows() != w.dim()) {
    throw std::invalid_argument("project_to_tangent: dimension mismatch");
  }
  Eigen::MatrixXd projected = w.matrix() * sym_part(g) * w.matrix();
  return TangentVector(sym_part(projected), w);
}

SpdMatrix expm_sym(const Eigen::MatrixXd& s) {
  require_square(s, "expm_sym");
  if (max_asymmetry(s) > kExpmSymmetryTol) {
    throw std::invalid_argument("expm_sym: input is not symmetric");
  }
  auto es = eig_sym(sym_part(s), "expm_sym");
  Eigen::VectorXd lam = es.eigenvalues().array().exp();
  Eigen::MatrixXd out =
      es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return SpdMatrix(sym_part(out));
}

Eigen::MatrixXd logm_spd(const SpdMatrix& w) {
  auto es = eig_sym(w.matrix(), "logm_spd");
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw NumericError("logm_spd: non-positive eigenvalue");
  }
  Eigen::VectorXd lam = es.eigenvalues().array().log();
  return sym_part(es.eigenvectors() * lam.asDiagonal() *
                  es.eigenvectors().transpose());
}

std::pair<SpdMatrix, SpdMatrix> sqrt_and_invsqrt(const SpdMatrix& w) {
  auto es = eig_sym(w.matrix(), "sqrt_and_invsqrt");
  const Eigen::VectorXd& lam = es.eigenvalues();
  if (lam.minCoeff() < kEigenvalueFloor * lam.maxCoeff()) {
    throw NumericError(
        "sqrt_and_invsqrt: matrix is ill-conditioned (eigenvalue below "
        "relative floor 1e-12)");
  }
  Eigen::VectorXd root = lam.array().sqrt();
  Eigen::VectorXd inv_root = root.array().inverse();
  const Eigen::MatrixXd& q = es.eigenvectors();
  SpdMatrix sqrt_w(sym_part(q * root.asDiagonal() * q.transpose()));
  SpdMatrix invsqrt_w(sym_part(q * inv_root.asDiagonal() * q.transpose()));
  return {std::move(sqrt_w), std::move(invsqrt_w)};
}

SpdMatrix retract(const SpdMatrix& w, const TangentVector& z) {
  require_same_base(z, w, "retract");
  auto [sqrt_w, invsqrt_w] = sqrt_and_invsqrt(w);
  Eigen::MatrixXd inner =
      sym_part(invsqrt_w.matrix() * z.data() * invsqrt_w.matrix());
  SpdMatrix core = expm_sym(inner);
  Eigen::MatrixXd out = sqrt_w.matrix() * core.matrix() * sqrt_w.matrix();
  return SpdMatrix(sym_part(out));
}

TangentVector parallel_transport(const TangentVector& z, const SpdMatrix& from,
                                 const SpdMatrix& to) {
  require_same_base(z, from, "parallel_transport");
  if (to.dim() != from.dim()) {
    throw std::invalid_argument("parallel_transport: dimension mismatch");
  }
  auto [sqrt_f, invsqrt_f] = sqrt_and_invsqrt(from);
  // E = (to·from⁻¹)^{1/2} = from^{1/2} A^{1/2} from^{-1/2} with the symmetric
  // product A = from^{-1/2} · to · from^{-1/2}.
  Eigen::MatrixXd a =
      sym_part(invsqrt_f.matrix() * to.matrix() * invsqrt_f.matrix());
  auto es = eig_sym(a, "parallel_transport");
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw NumericError("parallel_transport: endpoints are not both SPD");
  }
  Eigen::VectorXd root = es.eigenvalues().array().sqrt();
  Eigen::MatrixXd a_sqrt = sym_part(es.eigenvectors() * root.asDiagonal() *
                                    es.eigenvectors().transpose());
  Eigen::MatrixXd e = sqrt_f.matrix() * a_sqrt * invsqrt_f.matrix();
  return TangentVector(sym_part(e * z.data() * e.transpose()), to);
}

TangentVector transport(const TangentVector& z, const SpdMatrix& from,
                        const SpdMatrix& to, TransportRule rule) {
  if (rule == TransportRule::airm) {
    return parallel_transport(z, from, to);
  }
  require_same_base(z, from, "transport");
  return project_to_tangent(to, z.data());
}

SpdMatrix random_spd(int dim, Rng& rng, double eig_min, double eig_max) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = gauss(rng);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  std::uniform_real_distribution<double> unif(eig_min, eig_max);
  Eigen::VectorXd lam(dim);
  for (int i = 0; i < dim; ++i) {
    lam(i) = unif(rng);
  }
  return SpdMatrix(sym_part(q * lam.asDiagonal() * q.transpose()));
}

TangentVector random_tangent(const SpdMatrix& base, Rng& rng, double norm) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  int dim = base.dim();
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = gauss(rng);
    }
  }
  Eigen::MatrixXd s = sym_part(g);
  double n = s.norm();
  if (n > 0.0) {
    s *= norm / n;
  }
  return TangentVector(s, base);
}

}  // namespace mdaml
