#include "leape/fit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "leape/quadrature.hpp"

namespace leape {

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd regularizer_diagonal(const ShoreBasis& basis,
                                     const FitConfig& cfg) {
  Eigen::VectorXd d(basis.n_c);
  for (int j = 0; j < basis.n_c; ++j) {
    const ShoreIndex& idx = basis.indices[static_cast<size_t>(j)];
    const double nn = double(idx.n) * (idx.n + 1.0);
    const double ll = double(idx.l) * (idx.l + 1.0);
    d[j] = cfg.lambda_n * nn * nn + cfg.lambda_l * ll * ll;
  }
  return d;
}
}  // namespace

ShoreFitter::ShoreFitter(const GradientScheme& scheme, const ShoreBasis& basis,
                         const FitConfig& cfg) {
  if (cfg.lambda_n < 0.0 || cfg.lambda_l < 0.0)
    throw std::invalid_argument("ShoreFitter: negative regularization weight");
  Phi_ = signal_design_matrix(scheme, basis);
  A_ = Phi_.transpose() * Phi_;
  A_.diagonal() += regularizer_diagonal(basis, cfg);
  if (cfg.lambda_n == 0.0 && cfg.lambda_l == 0.0 && scheme.size() < basis.n_c)
    throw std::runtime_error(
        "fit_shore: rank-deficient system: K=" + std::to_string(scheme.size()) +
        " samples < n_c=" + std::to_string(basis.n_c) +
        " coefficients with zero regularization");
  ldlt_.compute(A_);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error(
        "fit_shore: LDLT factorization of the regularized normal matrix "
        "failed (degenerate scheme?)");
}

CoefVector ShoreFitter::fit(const Eigen::VectorXd& y) const {
  if (y.size() != Phi_.rows())
    throw std::invalid_argument("fit: signal length does not match scheme");
  const Eigen::VectorXd rhs = Phi_.transpose() * y;
  CoefVector c = ldlt_.solve(rhs);
  // One iterative-refinement step tightens the normal-equation residual.
  c += ldlt_.solve(rhs - A_ * c);
  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0) {
    const double rel = (A_ * c - rhs).norm() / rhs_norm;
    if (!(rel < 1e-8))
      throw std::runtime_error(
          "fit_shore: normal-equation residual " + std::to_string(rel) +
          " exceeds 1e-8 (rank-deficient or ill-conditioned system)");
  }
  return c;
}

CoefVector fit_shore(const Eigen::VectorXd& y, const GradientScheme& scheme,
                     const ShoreBasis& basis, const FitConfig& cfg) {
  return ShoreFitter(scheme, basis, cfg).fit(y);
}

Eigen::VectorXd reconstruct_signal(const CoefVector& c,
                                   const Eigen::MatrixXd& Phi) {
  if (c.size() != Phi.cols())
    throw std::invalid_argument("reconstruct_signal: dimension mismatch");
  return Phi * c;
}

double eap_eval(const CoefVector& c, const Eigen::Vector3d& R,
                const ShoreBasis& basis) {
  if (c.size() != basis.n_c)
    throw std::invalid_argument("eap_eval: coefficient length != n_c");
  double acc = 0.0;
  for (int j = 0; j < basis.n_c; ++j)
    acc += c[j] * psi(basis.indices[static_cast<size_t>(j)], R, basis.zeta);
  return acc;
}

double rtop(const CoefVector& c, const ShoreBasis& basis) {
  if (c.size() != basis.n_c)
    throw std::invalid_argument("rtop: coefficient length != n_c");
  const Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double acc = 0.0;
  for (int j = 0; j < basis.n_c; ++j) {
    const ShoreIndex& idx = basis.indices[static_cast<size_t>(j)];
    if (idx.l != 0) continue;
    acc += c[j] * psi(idx, origin, basis.zeta);
  }
  return acc;
}

double msd(const CoefVector& c, const ShoreBasis& basis) {
  if (c.size() != basis.n_c)
    throw std::invalid_argument("msd: coefficient length != n_c");
  // Psi_{n00} is isotropic, so Int |R|^2 Psi dR = 4 pi * Int r^4 Psi(r e_z) dr.
  const double r_max = 5.0 / std::sqrt(2.0 * kPi * kPi * basis.zeta);
  const Quadrature1D quad = gauss_legendre(64, 0.0, r_max);
  double acc = 0.0;
  for (int j = 0; j < basis.n_c; ++j) {
    const ShoreIndex& idx = basis.indices[static_cast<size_t>(j)];
    if (idx.l != 0 || c[j] == 0.0) continue;
    double mom = 0.0;
    for (size_t t = 0; t < quad.nodes.size(); ++t) {
      const double r = quad.nodes[t];
      const Eigen::Vector3d R(0.0, 0.0, r);
      mom += quad.weights[t] * r * r * r * r * psi(idx, R, basis.zeta);
    }
    acc += c[j] * 4.0 * kPi * mom;
  }
  return acc;
}

Eigen::VectorXd odf_sample(const CoefVector& c, const Eigen::MatrixXd& ups) {
  if (c.size() != ups.cols())
    throw std::invalid_argument("odf_sample: dimension mismatch");
  return ups * c;
}

}  // namespace leape
