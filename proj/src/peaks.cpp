#include "leape/peaks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace leape {

namespace {
constexpr double kPi = 3.14159265358979323846;

using Edge = std::pair<int, int>;

Edge ordered_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }
}  // namespace

Eigen::Vector3d canonicalize_direction(const Eigen::Vector3d& u) {
  const double eps = 0.0;
  if (u.z() > eps) return u;
  if (u.z() < -eps) return -u;
  if (u.y() > eps) return u;
  if (u.y() < -eps) return -u;
  return u.x() >= 0.0 ? u : Eigen::Vector3d(-u);
}

double angle_between_lines_deg(const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b) {
  const double c = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return std::acos(c) * 180.0 / kPi;
}

DirectionSet tessellate_sphere(int subdivisions) {
  if (subdivisions < 0 || subdivisions > 5)
    throw std::invalid_argument("tessellate_sphere: subdivisions must be in [0, 5]");

  // Icosahedron from golden-ratio rectangles.
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Eigen::Vector3d& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<Edge, int> midpoint;
    auto mid = [&](int a, int b) {
      const Edge key = ordered_edge(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Eigen::Vector3d v =
          (verts[static_cast<size_t>(a)] + verts[static_cast<size_t>(b)]).normalized();
      verts.push_back(v);
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }

  DirectionSet out;
  out.dirs = std::move(verts);
  out.adjacency.assign(out.dirs.size(), {});
  std::map<Edge, bool> seen;
  for (const auto& f : faces)
    for (int e = 0; e < 3; ++e) {
      const int a = f[static_cast<size_t>(e)];
      const int b = f[static_cast<size_t>((e + 1) % 3)];
      if (!seen.emplace(ordered_edge(a, b), true).second) continue;
      out.adjacency[static_cast<size_t>(a)].push_back(b);
      out.adjacency[static_cast<size_t>(b)].push_back(a);
    }
  for (auto& nb : out.adjacency) std::sort(nb.begin(), nb.end());
  return out;
}

FoSet find_peaks(const Eigen::VectorXd& v, const DirectionSet& dirs,
                 const PeakConfig& cfg) {
  if (!dirs.has_adjacency())
    throw std::invalid_argument("find_peaks: direction set has no adjacency");
  if (v.size() != dirs.size())
    throw std::invalid_argument("find_peaks: value count != vertex count");
  if (!(cfg.relative_threshold > 0.0 && cfg.relative_threshold <= 1.0))
    throw std::invalid_argument("find_peaks: relative_threshold out of (0, 1]");
  if (!(cfg.min_sep_angle > 0.0 && cfg.min_sep_angle < 90.0))
    throw std::invalid_argument("find_peaks: min_sep_angle out of (0, 90)");

  const double vmax = v.maxCoeff();
  const double threshold = cfg.relative_threshold * vmax;

  // Strict local maxima over the one-ring neighborhood.
  std::vector<int> candidates;
  for (int i = 0; i < dirs.size(); ++i) {
    if (v[i] < threshold) continue;
    bool strict_max = true;
    for (int nb : dirs.adjacency[static_cast<size_t>(i)])
      if (v[nb] >= v[i]) {
        strict_max = false;
        break;
      }
    if (strict_max) candidates.push_back(i);
  }

  // Descending value; ties by lower vertex index.
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;
  });

  FoSet out;
  for (int i : candidates) {
    if (out.size() >= cfg.max_peaks) break;
    const Eigen::Vector3d u = dirs.dirs[static_cast<size_t>(i)];
    bool separated = true;
    for (const Eigen::Vector3d& kept : out.fos)
      if (angle_between_lines_deg(u, kept) < cfg.min_sep_angle) {
        separated = false;
        break;
      }
    if (separated) out.fos.push_back(canonicalize_direction(u));
  }
  return out;
}

double fo_error(const FoSet& est, const FoSet& ref) {
  if (est.empty() && ref.empty()) return 0.0;
  if (est.empty() || ref.empty()) return 90.0;
  auto mean_min_angle = [](const FoSet& from, const FoSet& to) {
    double acc = 0.0;
    for (const Eigen::Vector3d& a : from.fos) {
      double best = 90.0;
      for (const Eigen::Vector3d& b : to.fos)
        best = std::min(best, angle_between_lines_deg(a, b));
      acc += best;
    }
    return acc / from.size();
  };
  return 0.5 * (mean_min_angle(ref, est) + mean_min_angle(est, ref));
}

}  // namespace leape
