#pragma once

#include <Eigen/Dense>

#include "leape/scheme.hpp"
#include "leape/shore.hpp"

// Conventional (regularized least squares) coefficient estimation and all
// feature extraction from a coefficient vector: signal reconstruction,
// propagator evaluation, RTOP, MSD, and ODF sampling.

namespace leape {

// EAP coefficient vector, length n_c, ordered per ShoreBasis::indices.
using CoefVector = Eigen::VectorXd;

struct FitConfig {
  double lambda_n = 1e-8;  // radial regularization weight, diag((n(n+1))^2)
  double lambda_l = 1e-8;  // angular regularization weight, diag((l(l+1))^2)
};

// Reusable fitter for one (scheme, basis, config): factors the regularized
// normal matrix once, then solves per signal vector.  One step of iterative
// refinement keeps the normal-equation residual below 1e-8 relative.
class ShoreFitter {
 public:
  ShoreFitter(const GradientScheme& scheme, const ShoreBasis& basis,
              const FitConfig& cfg);

  CoefVector fit(const Eigen::VectorXd& y) const;

  const Eigen::MatrixXd& design_matrix() const { return Phi_; }

 private:
  Eigen::MatrixXd Phi_;
  Eigen::MatrixXd A_;  // Phi^T Phi + Lambda
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

// One-shot fit:
//   c = (Phi^T Phi + lambda_n diag((n(n+1))^2) + lambda_l diag((l(l+1))^2))^-1 Phi^T y.
// Throws std::invalid_argument on dimension mismatch and std::runtime_error
// (naming the deficiency) if the regularized system is singular — possible
// only with both lambdas zero and K < n_c or a degenerate scheme.
CoefVector fit_shore(const Eigen::VectorXd& y, const GradientScheme& scheme,
                     const ShoreBasis& basis, const FitConfig& cfg);

// y_hat = Phi c.
Eigen::VectorXd reconstruct_signal(const CoefVector& c,
                                   const Eigen::MatrixXd& Phi);

// P(R) = sum_j c_j Psi_j(R).
double eap_eval(const CoefVector& c, const Eigen::Vector3d& R,
                const ShoreBasis& basis);

// Return-to-origin probability P(0); only l = 0 terms contribute.
double rtop(const CoefVector& c, const ShoreBasis& basis);

// Mean squared displacement Int |R|^2 P(R) dR, from per-index radial moments
// (only l = 0 terms contribute, by the spherical mean-value property).
double msd(const CoefVector& c, const ShoreBasis& basis);

// v = Upsilon c.
Eigen::VectorXd odf_sample(const CoefVector& c, const Eigen::MatrixXd& ups);

}  // namespace leape
