#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "leape/phantom.hpp"
#include "leape/rng.hpp"

namespace test_helpers {

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    namespace fs = std::filesystem;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str(const std::string& rel = "") const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  std::filesystem::path path_;
};

inline Eigen::VectorXd random_vector(int n, leape::Rng& rng, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.gaussian();
  return v;
}

// Axis-symmetric tensor mixture with one compartment.
inline leape::TensorMixture single_tensor(double lambda1, double lambda_perp,
                                          const Eigen::Vector3d& axis) {
  leape::TensorMixture mix;
  mix.compartments.push_back(
      {1.0, Eigen::Vector3d(lambda1, lambda_perp, lambda_perp),
       axis.normalized()});
  return mix;
}

// Equal-fraction two-tensor crossing: first axis along x, second rotated by
// `angle_deg` about z (both in the xy-plane).
inline leape::TensorMixture crossing(double angle_deg, double lambda1,
                                     double lambda_perp) {
  const double a = angle_deg * M_PI / 180.0;
  leape::TensorMixture mix;
  mix.compartments.push_back(
      {0.5, Eigen::Vector3d(lambda1, lambda_perp, lambda_perp),
       Eigen::Vector3d(1, 0, 0)});
  mix.compartments.push_back(
      {0.5, Eigen::Vector3d(lambda1, lambda_perp, lambda_perp),
       Eigen::Vector3d(std::cos(a), std::sin(a), 0)});
  return mix;
}

}  // namespace test_helpers
