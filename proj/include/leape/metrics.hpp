#pragma once

#include <Eigen/Dense>

// Evaluation metrics: mean absolute differences (with optional cube-root
// transform) and the paired two-sided Student's t-test.

namespace leape {

enum class MetricTransform { kIdentity, kCubeRoot };

// mean_i |t(a_i) - t(b_i)|; the cube root is applied sign-symmetrically,
// t(x) = sign(x) |x|^{1/3}.  Throws on length mismatch or empty input.
double metric_mean_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            MetricTransform transform);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  int dof = 0;
};

// Paired t-test on d = a - b: t = mean(d) / (sd(d)/sqrt(n)), sd with the n-1
// denominator; two-sided p from the Student's t distribution with n-1 dof
// (regularized incomplete beta).  Throws std::invalid_argument for n < 2 or
// zero-variance differences.
TTestResult paired_t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Regularized incomplete beta I_x(a, b) by continued fraction (exposed for
// testing).
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace leape
