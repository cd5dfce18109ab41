#include "leape/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "leape/rng.hpp"

namespace leape {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTau = 1.0 / (4.0 * kPi * kPi);  // diffusion time convention

Eigen::Vector3d random_unit_vector(Rng& rng) {
  // Gaussian method: isotropic by construction.
  while (true) {
    Eigen::Vector3d v(rng.gaussian(), rng.gaussian(), rng.gaussian());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

// 90 directions by electrostatic repulsion with antipodal charges: minimize
// sum over pairs of 1/|u_i - u_j| + 1/|u_i + u_j| with fixed-step tangential
// descent, 1000 iterations.  Deterministic given seed.
std::vector<Eigen::Vector3d> repulsion_directions(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::Vector3d> u(static_cast<size_t>(n));
  for (auto& v : u) v = random_unit_vector(rng);

  const double step = 3e-4;
  std::vector<Eigen::Vector3d> force(static_cast<size_t>(n));
  for (int it = 0; it < 1000; ++it) {
    for (int i = 0; i < n; ++i) {
      Eigen::Vector3d f = Eigen::Vector3d::Zero();
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const Eigen::Vector3d d = u[static_cast<size_t>(i)] - u[static_cast<size_t>(j)];
        const Eigen::Vector3d s = u[static_cast<size_t>(i)] + u[static_cast<size_t>(j)];
        const double dn = d.norm(), sn = s.norm();
        if (dn > 1e-9) f += d / (dn * dn * dn);
        if (sn > 1e-9) f += s / (sn * sn * sn);
      }
      force[static_cast<size_t>(i)] = f;
    }
    for (int i = 0; i < n; ++i) {
      Eigen::Vector3d& v = u[static_cast<size_t>(i)];
      Eigen::Vector3d f = force[static_cast<size_t>(i)];
      f -= f.dot(v) * v;  // tangential component only
      v = (v + step * f).normalized();
    }
  }
  return u;
}
}  // namespace

void TensorMixture::validate() const {
  if (compartments.empty())
    throw std::invalid_argument("TensorMixture: no compartments");
  double total = 0.0;
  for (const TensorCompartment& c : compartments) {
    if (!(c.fraction > 0.0 && c.fraction <= 1.0))
      throw std::invalid_argument("TensorMixture: fraction outside (0, 1]");
    if (!(c.lambdas.minCoeff() > 0.0))
      throw std::invalid_argument("TensorMixture: non-positive eigenvalue");
    if (std::abs(c.axis.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("TensorMixture: non-unit principal axis");
    total += c.fraction;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("TensorMixture: fractions must sum to 1");
}

Eigen::Matrix3d compartment_tensor(const TensorCompartment& comp) {
  // Axis-symmetric tensor: lambda1 along axis, lambda2 = lambda3 transverse.
  const Eigen::Vector3d& a = comp.axis;
  const double l1 = comp.lambdas[0];
  const double lt = comp.lambdas[1];
  return lt * Eigen::Matrix3d::Identity() + (l1 - lt) * (a * a.transpose());
}

SchemePair make_hcp_like_scheme(std::uint64_t seed) {
  SchemePair out;
  const double shells[3] = {1000.0, 2000.0, 3000.0};
  std::vector<std::vector<Eigen::Vector3d>> shell_dirs;
  for (int s = 0; s < 3; ++s)
    shell_dirs.push_back(repulsion_directions(90, derive_seed(seed, static_cast<std::uint64_t>(s))));

  for (int s = 0; s < 3; ++s)
    for (const Eigen::Vector3d& d : shell_dirs[static_cast<size_t>(s)])
      out.dense.entries.push_back({d, shells[s]});
  out.dense.entries.push_back({Eigen::Vector3d::Zero(), 0.0});

  // First 30 of b=1000, first 30 of b=2000, plus the b=0 (by dense index).
  for (int i = 0; i < 30; ++i) out.sparse_indices.push_back(i);
  for (int i = 90; i < 120; ++i) out.sparse_indices.push_back(i);
  out.sparse_indices.push_back(out.dense.size() - 1);
  out.sparse = out.dense.subset(out.sparse_indices);
  return out;
}

Eigen::VectorXd simulate_signal(const TensorMixture& mix,
                                const GradientScheme& scheme) {
  mix.validate();
  std::vector<Eigen::Matrix3d> tensors;
  tensors.reserve(mix.compartments.size());
  for (const TensorCompartment& c : mix.compartments)
    tensors.push_back(compartment_tensor(c));

  Eigen::VectorXd y(scheme.size());
  for (int k = 0; k < scheme.size(); ++k) {
    const SchemeEntry& e = scheme.entries[static_cast<size_t>(k)];
    if (e.b <= 0.0) {
      y[k] = 1.0;
      continue;
    }
    double acc = 0.0;
    for (size_t i = 0; i < mix.compartments.size(); ++i)
      acc += mix.compartments[i].fraction *
             std::exp(-e.b * e.dir.dot(tensors[i] * e.dir));
    y[k] = acc;
  }
  return y;
}

Eigen::VectorXd add_rician_noise(const Eigen::VectorXd& y, double snr,
                                 std::uint64_t seed) {
  if (!(snr > 0.0)) throw std::invalid_argument("add_rician_noise: snr must be > 0");
  if (std::isinf(snr)) return y;
  const double sigma = 1.0 / snr;
  Rng rng(seed);
  Eigen::VectorXd out(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double n1 = sigma * rng.gaussian();
    const double n2 = sigma * rng.gaussian();
    out[k] = std::sqrt((y[k] + n1) * (y[k] + n1) + n2 * n2);
  }
  return out;
}

GroundTruthFeatures ground_truth_features(const TensorMixture& mix) {
  mix.validate();
  GroundTruthFeatures out;
  for (const TensorCompartment& c : mix.compartments) {
    const Eigen::Matrix3d D = compartment_tensor(c);
    out.msd += c.fraction * 2.0 * kTau * D.trace();
    out.rtop += c.fraction * std::pow(4.0 * kPi * kTau, -1.5) /
                std::sqrt(D.determinant());
    if (c.fraction >= 0.2)
      out.fos.fos.push_back(canonicalize_direction(c.axis));
  }
  return out;
}

TensorMixture sample_mixture(std::uint64_t seed) {
  Rng rng(seed);
  const int n = 1 + static_cast<int>(rng.index(3));
  TensorMixture mix;
  mix.compartments.resize(static_cast<size_t>(n));

  // Fractions: uniform on the simplex (sorted cuts), rejected until all >= 0.2.
  while (true) {
    std::array<double, 4> cuts{};
    cuts[0] = 0.0;
    for (int i = 1; i < n; ++i) cuts[static_cast<size_t>(i)] = rng.uniform();
    cuts[static_cast<size_t>(n)] = 1.0;
    std::sort(cuts.begin() + 1, cuts.begin() + n);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const double f = cuts[static_cast<size_t>(i) + 1] - cuts[static_cast<size_t>(i)];
      if (f < 0.2) ok = false;
      mix.compartments[static_cast<size_t>(i)].fraction = f;
    }
    if (ok) break;
  }
  // Renormalize exactly (guards the sum-to-1 invariant against rounding).
  double total = 0.0;
  for (const auto& c : mix.compartments) total += c.fraction;
  for (auto& c : mix.compartments) c.fraction /= total;
  double running = 0.0;
  for (size_t i = 0; i + 1 < mix.compartments.size(); ++i)
    running += mix.compartments[i].fraction;
  mix.compartments.back().fraction = 1.0 - running;

  // Axes: uniformly random, pairwise crossing angles >= 30 degrees.
  while (true) {
    for (auto& c : mix.compartments) c.axis = random_unit_vector(rng);
    bool ok = true;
    for (size_t i = 0; i < mix.compartments.size() && ok; ++i)
      for (size_t j = i + 1; j < mix.compartments.size() && ok; ++j)
        if (angle_between_lines_deg(mix.compartments[i].axis,
                                    mix.compartments[j].axis) < 30.0)
          ok = false;
    if (ok) break;
  }

  for (auto& c : mix.compartments) {
    const double l1 = rng.uniform_in(1.2e-3, 2.0e-3);
    const double lt = rng.uniform_in(0.2e-3, 0.5e-3);
    c.lambdas = Eigen::Vector3d(l1, lt, lt);
  }
  return mix;
}

}  // namespace leape
