#include "leape/shore.hpp"

#include <cmath>
#include <stdexcept>

#include "leape/quadrature.hpp"

namespace leape {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Normalized associated Legendre P̄_l^m(x) for m >= 0, scaled so that the
// real spherical harmonics built from it are orthonormal; the Condon-Shortley
// phase is folded out (all-positive recurrence).
double normalized_plm(int l, int m, double x) {
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));  // sin(theta)
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int k = 1; k <= m; ++k)
    pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  if (l == m) return pmm;
  double pm1 = std::sqrt(2.0 * m + 3.0) * x * pmm;  // P̄_{m+1}^m
  if (l == m + 1) return pm1;
  double p = 0.0;
  for (int k = m + 2; k <= l; ++k) {
    const double a = std::sqrt((4.0 * k * k - 1.0) / (double(k) * k - double(m) * m));
    const double b = std::sqrt(((k - 1.0) * (k - 1.0) - double(m) * m) /
                               (4.0 * (k - 1.0) * (k - 1.0) - 1.0));
    p = a * (x * pm1 - b * pmm);
    pmm = pm1;
    pm1 = p;
  }
  return p;
}

// sqrt(2 (n-l)! / (zeta^{3/2} Gamma(n+3/2))) via log-gamma (overflow-safe).
double kappa_signal(int n, int l, double zeta) {
  const double lg = std::log(2.0) + std::lgamma(n - l + 1.0) -
                    1.5 * std::log(zeta) - std::lgamma(n + 1.5);
  return std::exp(0.5 * lg);
}

// sqrt(16 pi^3 zeta^{3/2} (n-l)! / Gamma(n+3/2)).
double kappa_propagator(int n, int l, double zeta) {
  const double lg = std::log(16.0) + 3.0 * std::log(kPi) +
                    1.5 * std::log(zeta) + std::lgamma(n - l + 1.0) -
                    std::lgamma(n + 1.5);
  return std::exp(0.5 * lg);
}

// Radial part of Psi_nlm at radius r (everything except the Y_l^m factor).
double psi_radial(int n, int l, double r, double zeta) {
  const double t = 4.0 * kPi * kPi * zeta * r * r;
  const double sign = (n - l / 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * kappa_propagator(n, l, zeta) * std::pow(t, l / 2.0) *
         std::exp(-0.5 * t) * laguerre(n - l, l + 0.5, t);
}
}  // namespace

int shore_coeff_count(int N) {
  if (N < 0 || N % 2 != 0)
    throw std::invalid_argument("shore_coeff_count: N must be even and >= 0");
  const int F = N / 2;
  return (F + 1) * (F + 2) * (4 * F + 3) / 6;
}

std::vector<ShoreIndex> build_index_set(int N) {
  if (N < 0 || N % 2 != 0)
    throw std::invalid_argument("build_index_set: N must be even and >= 0");
  std::vector<ShoreIndex> out;
  for (int l = 0; l <= N; l += 2)
    for (int n = l; n <= (N + l) / 2; ++n)
      for (int m = -l; m <= l; ++m) out.push_back({n, l, m});
  return out;
}

ShoreBasis ShoreBasis::make(int N, double zeta) {
  if (zeta <= 0.0) throw std::invalid_argument("ShoreBasis: zeta must be > 0");
  ShoreBasis b;
  b.N = N;
  b.zeta = zeta;
  b.indices = build_index_set(N);
  b.n_c = static_cast<int>(b.indices.size());
  return b;
}

double laguerre(int k, double a, double x) {
  if (k < 0) throw std::invalid_argument("laguerre: k must be >= 0");
  if (k == 0) return 1.0;
  double lm1 = 1.0, l = 1.0 + a - x;
  for (int i = 2; i <= k; ++i) {
    const double next = ((2.0 * i - 1.0 + a - x) * l - (i - 1.0 + a) * lm1) / i;
    lm1 = l;
    l = next;
  }
  return l;
}

double real_sh(int l, int m, const Eigen::Vector3d& u) {
  if (std::abs(m) > l) throw std::invalid_argument("real_sh: |m| > l");
  const int am = std::abs(m);
  const double p = normalized_plm(l, am, u.z());
  if (m == 0) return p;
  const double phi_angle = std::atan2(u.y(), u.x());
  const double fac = std::sqrt(2.0) * p;
  return m > 0 ? fac * std::cos(am * phi_angle) : fac * std::sin(am * phi_angle);
}

double phi(const ShoreIndex& idx, const Eigen::Vector3d& q, double zeta) {
  if (zeta <= 0.0) throw std::invalid_argument("phi: zeta must be > 0");
  const double q2 = q.squaredNorm();
  if (q2 == 0.0) {
    if (idx.l > 0) return 0.0;
    // l = 0 limit: angular factor is the constant Y_0^0.
    return kappa_signal(idx.n, 0, zeta) * laguerre(idx.n, 0.5, 0.0) *
           (1.0 / (2.0 * std::sqrt(kPi)));
  }
  const double x = q2 / zeta;
  return kappa_signal(idx.n, idx.l, zeta) * std::pow(x, idx.l / 2.0) *
         std::exp(-0.5 * x) * laguerre(idx.n - idx.l, idx.l + 0.5, x) *
         real_sh(idx.l, idx.m, q / std::sqrt(q2));
}

double psi(const ShoreIndex& idx, const Eigen::Vector3d& R, double zeta) {
  if (zeta <= 0.0) throw std::invalid_argument("psi: zeta must be > 0");
  const double r = R.norm();
  if (r == 0.0) {
    if (idx.l > 0) return 0.0;
    return psi_radial(idx.n, 0, 0.0, zeta) * (1.0 / (2.0 * std::sqrt(kPi)));
  }
  return psi_radial(idx.n, idx.l, r, zeta) * real_sh(idx.l, idx.m, R / r);
}

Eigen::MatrixXd signal_design_matrix(const GradientScheme& scheme,
                                     const ShoreBasis& basis) {
  if (scheme.size() == 0)
    throw std::invalid_argument("signal_design_matrix: empty scheme");
  Eigen::MatrixXd M(scheme.size(), basis.n_c);
  for (int k = 0; k < scheme.size(); ++k) {
    const Eigen::Vector3d q = scheme.q_vector(k);
    for (int j = 0; j < basis.n_c; ++j)
      M(k, j) = phi(basis.indices[static_cast<size_t>(j)], q, basis.zeta);
  }
  return M;
}

Eigen::MatrixXd odf_matrix(const DirectionSet& dirs, const ShoreBasis& basis) {
  return odf_matrix(dirs, basis, 64);
}

Eigen::MatrixXd odf_matrix(const DirectionSet& dirs, const ShoreBasis& basis,
                           int radial_nodes) {
  if (dirs.size() == 0) throw std::invalid_argument("odf_matrix: empty dirs");
  const double r_max = 5.0 / std::sqrt(2.0 * kPi * kPi * basis.zeta);
  const Quadrature1D quad = gauss_legendre(radial_nodes, 0.0, r_max);

  // rho_j = Int r^2 * radial_j(r) dr; the full entry factorizes as
  // rho_j * Y_{l_j}^{m_j}(u_i).
  Eigen::VectorXd rho(basis.n_c);
  for (int j = 0; j < basis.n_c; ++j) {
    const ShoreIndex& idx = basis.indices[static_cast<size_t>(j)];
    double acc = 0.0;
    for (size_t t = 0; t < quad.nodes.size(); ++t) {
      const double r = quad.nodes[t];
      acc += quad.weights[t] * r * r * psi_radial(idx.n, idx.l, r, basis.zeta);
    }
    rho[j] = acc;
  }

  Eigen::MatrixXd M(dirs.size(), basis.n_c);
  for (int i = 0; i < dirs.size(); ++i)
    for (int j = 0; j < basis.n_c; ++j) {
      const ShoreIndex& idx = basis.indices[static_cast<size_t>(j)];
      M(i, j) = rho[j] * real_sh(idx.l, idx.m, dirs.dirs[static_cast<size_t>(i)]);
    }
  return M;
}

DirectionSet fibonacci_directions(int M) {
  if (M < 1) throw std::invalid_argument("fibonacci_directions: M must be >= 1");
  DirectionSet out;
  out.hemisphere = true;
  out.dirs.reserve(static_cast<size_t>(M));
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < M; ++i) {
    const double z = (i + 0.5) / M;
    const double r = std::sqrt(1.0 - z * z);
    const double a = golden_angle * i;
    out.dirs.emplace_back(r * std::cos(a), r * std::sin(a), z);
  }
  return out;
}

}  // namespace leape
