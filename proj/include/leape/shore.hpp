#pragma once

#include <Eigen/Dense>
#include <vector>

#include "leape/scheme.hpp"

// SHORE basis: Gaussian-weighted Laguerre radial functions times real
// spherical harmonics, used to expand the normalized q-space signal E(q) and
// (through its analytic Fourier transform) the ensemble average propagator
// P(R).
//
// Conventions (fixed for the whole library):
//  * Fourier pair       P(R) = Int E(q) exp(-2 pi i q.R) dq,
//    diffusion time     tau  = 1/(4 pi^2)  =>  |q| = sqrt(b).
//  * Real spherical harmonics are orthonormal over the sphere, built from
//    associated Legendre functions WITHOUT the Condon-Shortley phase;
//    m > 0 maps to cosine terms, m < 0 to sine terms, m = 0 is zonal.
//  * Only even angular orders l appear (q-space signals are antipodally
//    symmetric), with l <= n <= (N + l)/2.
//  * The coefficient layout is the index list sorted by (l, n, m) ascending;
//    every matrix and coefficient vector in the library uses this order.

namespace leape {

struct ShoreIndex {
  int n = 0;  // radial index
  int l = 0;  // angular order (even)
  int m = 0;  // angular degree, |m| <= l
};

// Number of basis functions for max radial order N: with F = N/2,
// n_c = (F+1)(F+2)(4F+3)/6  (e.g. N=6 -> 50).
int shore_coeff_count(int N);

// Ordered index set; throws std::invalid_argument for odd or negative N.
std::vector<ShoreIndex> build_index_set(int N);

struct ShoreBasis {
  int N = 6;            // max radial order (even)
  double zeta = 700.0;  // scale, in q^2 units (= s/mm^2 under tau convention)
  std::vector<ShoreIndex> indices;
  int n_c = 0;

  static ShoreBasis make(int N, double zeta);
};

// Set of unit directions; adjacency is present for sphere tessellations and
// absent for plain sampling sets.
struct DirectionSet {
  std::vector<Eigen::Vector3d> dirs;
  std::vector<std::vector<int>> adjacency;  // empty if not a tessellation
  bool hemisphere = false;

  int size() const { return static_cast<int>(dirs.size()); }
  bool has_adjacency() const { return !adjacency.empty(); }
};

// Generalized Laguerre polynomial L_k^{(a)}(x) by the three-term recurrence
// L_0 = 1, L_1 = 1 + a - x, k L_k = (2k - 1 + a - x) L_{k-1} - (k - 1 + a) L_{k-2}.
double laguerre(int k, double a, double x);

// Real spherical harmonic Y_l^m(u) for even l (see conventions above).
// Throws std::invalid_argument if |m| > l.
double real_sh(int l, int m, const Eigen::Vector3d& u);

// Signal-domain basis function
//   Phi_nlm(q) = kappa * (q^2/zeta)^{l/2} exp(-q^2/(2 zeta))
//                * L_{n-l}^{l+1/2}(q^2/zeta) * Y_l^m(q/|q|),
//   kappa = sqrt(2 (n-l)! / (zeta^{3/2} Gamma(n + 3/2))).
// At q = 0 only l = 0 terms are nonzero (direction irrelevant).
double phi(const ShoreIndex& idx, const Eigen::Vector3d& q, double zeta);

// Propagator-domain dual (analytic Fourier transform of phi):
//   Psi_nlm(R) = (-1)^{n - l/2} * kappa' * (4 pi^2 zeta r^2)^{l/2}
//                * exp(-2 pi^2 zeta r^2) * L_{n-l}^{l+1/2}(4 pi^2 zeta r^2)
//                * Y_l^m(R/|R|),
//   kappa' = sqrt(16 pi^3 zeta^{3/2} (n-l)! / Gamma(n + 3/2)).
double psi(const ShoreIndex& idx, const Eigen::Vector3d& R, double zeta);

// K x n_c design matrix: entry (k, j) = phi(indices[j], q_k, zeta).
Eigen::MatrixXd signal_design_matrix(const GradientScheme& scheme,
                                     const ShoreBasis& basis);

// M x n_c ODF matrix Upsilon: entry (i, j) = Int_0^inf Psi_j(r u_i) r^2 dr.
// The radial integral is Gauss-Legendre with 64 nodes on [0, r_max],
// r_max = 5/sqrt(2 pi^2 zeta) (Gaussian envelope < 1e-5 of peak beyond).
Eigen::MatrixXd odf_matrix(const DirectionSet& dirs, const ShoreBasis& basis);

// Same with explicit node count (used by the quadrature convergence check).
Eigen::MatrixXd odf_matrix(const DirectionSet& dirs, const ShoreBasis& basis,
                           int radial_nodes);

// M approximately uniform directions on the upper hemisphere (z >= 0) by the
// spherical Fibonacci construction; deterministic, no adjacency.
DirectionSet fibonacci_directions(int M);

}  // namespace leape
