#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace leape {

// One q-space sample: unit gradient direction + b-value in s/mm^2.
// For b = 0 the direction is irrelevant and stored as the zero vector.
struct SchemeEntry {
  Eigen::Vector3d dir;
  double b = 0.0;
};

// A diffusion gradient scheme: ordered list of (direction, b) samples.
//
// Unit convention used throughout the library: the diffusion time is fixed
// at tau = 1/(4*pi^2), so the q-space radius of a sample is |q| = sqrt(b).
struct GradientScheme {
  std::vector<SchemeEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }

  // q-vector of entry k under the tau = 1/(4 pi^2) convention.
  Eigen::Vector3d q_vector(int k) const {
    const SchemeEntry& e = entries[static_cast<size_t>(k)];
    return e.b > 0.0 ? Eigen::Vector3d(std::sqrt(e.b) * e.dir)
                     : Eigen::Vector3d::Zero();
  }

  // Restriction to a subset of rows (order given by `indices`).
  GradientScheme subset(const std::vector<int>& indices) const;

  // Indices of the diffusion-weighted (b > 0) entries, in scheme order.
  std::vector<int> dw_indices() const;
};

// Text scheme file: one line per sample, "gx gy gz b", space-separated.
// Round-trips losslessly (directions written with max double precision).
GradientScheme load_scheme(const std::string& path);
void save_scheme(const GradientScheme& scheme, const std::string& path);

}  // namespace leape
