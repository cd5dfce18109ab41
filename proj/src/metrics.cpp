#include "leape/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace leape {

namespace {
// Continued fraction for the incomplete beta (modified Lentz algorithm).
double beta_continued_fraction(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h;
}
}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0))
    throw std::invalid_argument("regularized_incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  // The continued fraction converges fast for x < (a+1)/(a+b+2); use the
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double metric_mean_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            MetricTransform transform) {
  if (a.size() != b.size())
    throw std::invalid_argument("metric_mean_abs_diff: length mismatch");
  if (a.size() == 0)
    throw std::invalid_argument("metric_mean_abs_diff: empty input");
  auto t = [transform](double x) {
    if (transform == MetricTransform::kIdentity) return x;
    return x >= 0.0 ? std::cbrt(x) : -std::cbrt(-x);
  };
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += std::abs(t(a[i]) - t(b[i]));
  return acc / static_cast<double>(a.size());
}

TTestResult paired_t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("paired_t_test: length mismatch");
  const Eigen::Index n = a.size();
  if (n < 2) throw std::invalid_argument("paired_t_test: need n >= 2");
  const Eigen::VectorXd d = a - b;
  const double mean = d.mean();
  const double ss = (d.array() - mean).square().sum();
  if (ss <= 0.0)
    throw std::invalid_argument(
        "paired_t_test: zero variance of paired differences (degenerate input)");
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTestResult res;
  res.dof = static_cast<int>(n - 1);
  res.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  // Two-sided p-value: P(|T| > |t|) = I_{nu/(nu+t^2)}(nu/2, 1/2).
  const double nu = static_cast<double>(res.dof);
  res.p = regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + res.t * res.t));
  return res;
}

}  // namespace leape
