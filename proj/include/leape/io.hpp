#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

// On-disk formats.
//
// Volume = raw little-endian float32 array in sample-major order (sample i,
// entry j at offset (i*row_length + j)*4) plus a JSON sidecar at
// "<path>.json" with keys {n_samples, row_length, scheme_path, basis, dtype,
// order}; basis is {"N": .., "zeta": ..} for coefficient volumes and null for
// signal volumes.
//
// All writes are atomic: temp file in the target directory, then rename.

namespace leape {

struct BasisId {
  int N = 6;
  double zeta = 700.0;
};

struct VolumeMeta {
  std::int64_t n_samples = 0;
  std::int64_t row_length = 0;
  std::string scheme_path;  // relative path, informational
  std::optional<BasisId> basis;
};

void atomic_write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

void write_volume(const std::string& path, const Eigen::MatrixXd& data,
                  const VolumeMeta& meta);
Eigen::MatrixXd read_volume(const std::string& path, VolumeMeta* meta = nullptr);

// Canonical JSON text: sorted keys, 2-space indent, trailing newline.
std::string canonical_json(const nlohmann::json& j);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// FNV-1a 64-bit content hash, as 16 hex digits (used to fingerprint scheme
// files in model manifests).
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace leape
