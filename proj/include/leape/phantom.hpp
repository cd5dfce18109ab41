#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "leape/peaks.hpp"
#include "leape/scheme.hpp"

// Synthetic ground truth: multi-shell schemes, multi-tensor signals, Rician
// noise, and analytic feature values for Gaussian mixtures.

namespace leape {

struct TensorCompartment {
  double fraction = 1.0;
  Eigen::Vector3d lambdas;  // eigenvalues (lambda1 >= lambda2 >= lambda3), mm^2/s
  Eigen::Vector3d axis;     // principal axis (unit)
};

struct TensorMixture {
  std::vector<TensorCompartment> compartments;

  // Throws std::invalid_argument if fractions do not sum to 1 (1e-12),
  // any fraction is outside (0, 1], or any eigenvalue is <= 0.
  void validate() const;
};

// Diffusion tensor of one compartment (axis-symmetric about `axis`).
Eigen::Matrix3d compartment_tensor(const TensorCompartment& comp);

struct SchemePair {
  GradientScheme dense;              // 3 shells x 90 directions + one b=0
  GradientScheme sparse;             // 30 of b=1000 + 30 of b=2000 + the b=0
  std::vector<int> sparse_indices;   // positions of sparse entries in dense
};

// Shells b in {1000, 2000, 3000} s/mm^2 with 90 directions each, optimized
// per shell by iterative electrostatic repulsion with antipodal charges
// (1000 fixed iterations), plus one trailing b=0 sample.  The sparse subset
// takes the first 30 directions of the b=1000 and b=2000 shells plus the b=0.
// Deterministic given seed.
SchemePair make_hcp_like_scheme(std::uint64_t seed);

// y_k = sum_i f_i exp(-b_k u_k^T D_i u_k); y = 1 at b = 0.
Eigen::VectorXd simulate_signal(const TensorMixture& mix,
                                const GradientScheme& scheme);

// Rician noise: y'_k = sqrt((y_k + n1)^2 + n2^2) with n1, n2 ~ N(0, (1/snr)^2).
// Deterministic given (seed); entry k consumes the (2k, 2k+1)-th Gaussians.
Eigen::VectorXd add_rician_noise(const Eigen::VectorXd& y, double snr,
                                 std::uint64_t seed);

struct GroundTruthFeatures {
  double msd = 0.0;
  double rtop = 0.0;
  FoSet fos;
};

// Analytic Gaussian-mixture features under tau = 1/(4 pi^2):
//   MSD  = sum_i f_i * 2 tau tr(D_i),
//   RTOP = sum_i f_i * (4 pi tau)^{-3/2} |D_i|^{-1/2},
//   FOs  = principal axes of compartments with fraction >= 0.2.
GroundTruthFeatures ground_truth_features(const TensorMixture& mix);

// Corpus sampling recipe for the synthetic experiments: 1-3 compartments,
// fractions >= 0.2, lambda1 in [1.2, 2.0]e-3, lambda2 = lambda3 in
// [0.2, 0.5]e-3, uniformly random axes with pairwise crossing angles >= 30 deg.
TensorMixture sample_mixture(std::uint64_t seed);

}  // namespace leape
