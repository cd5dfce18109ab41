#pragma once

#include <Eigen/Dense>
#include <vector>

#include "leape/shore.hpp"

// Fiber-orientation extraction: icosphere tessellation, discrete ODF peak
// finding, and the angular error metric between orientation sets.

namespace leape {

// Set of fiber orientations: unit vectors canonicalized to z >= 0
// (ties broken by y >= 0, then x >= 0).  May be empty.
struct FoSet {
  std::vector<Eigen::Vector3d> fos;

  int size() const { return static_cast<int>(fos.size()); }
  bool empty() const { return fos.empty(); }
};

struct PeakConfig {
  double relative_threshold = 0.25;  // fraction of the global max
  double min_sep_angle = 25.0;       // degrees, antipodally identified
  int max_peaks = 3;
};

// Canonical antipodal representative (z >= 0; ties: y >= 0, then x >= 0).
Eigen::Vector3d canonicalize_direction(const Eigen::Vector3d& u);

// Angle in [0, 90] degrees between two directions with antipodal identity.
double angle_between_lines_deg(const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b);

// Icosahedron subdivided `subdivisions` times, vertices on the unit sphere;
// vertex count 10*4^s + 2, adjacency from triangle edges (symmetric).
// Requires 0 <= subdivisions <= 5.
DirectionSet tessellate_sphere(int subdivisions);

// Strict local maxima of v over the tessellation neighborhood, thresholded at
// relative_threshold * max(v), greedily kept in descending value subject to
// min_sep_angle, truncated to max_peaks, canonicalized.  Ties in value are
// broken by lower vertex index.  Throws if dirs has no adjacency.
FoSet find_peaks(const Eigen::VectorXd& v, const DirectionSet& dirs,
                 const PeakConfig& cfg);

// Symmetric mean minimal angular separation in degrees:
//   0.5 * [mean over ref of min angle to est + mean over est of min angle to ref],
// angles antipodally identified in [0, 90].  Exactly one empty set -> 90;
// both empty -> 0.
double fo_error(const FoSet& est, const FoSet& ref);

}  // namespace leape
