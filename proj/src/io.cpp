#include "leape/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace leape {

namespace fs = std::filesystem;
using nlohmann::json;

void atomic_write_file(const std::string& path, const std::string& bytes) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write_file: cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("atomic_write_file: write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_file: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

std::string canonical_json(const json& j) {
  return j.dump(2) + "\n";  // nlohmann objects keep keys sorted
}

void write_json(const std::string& path, const json& j) {
  atomic_write_file(path, canonical_json(j));
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("read_json: " + path + ": " + e.what());
  }
}

void write_volume(const std::string& path, const Eigen::MatrixXd& data,
                  const VolumeMeta& meta) {
  if (data.rows() != meta.n_samples || data.cols() != meta.row_length)
    throw std::invalid_argument("write_volume: data shape does not match meta");

  std::string bytes;
  bytes.resize(static_cast<size_t>(data.size()) * sizeof(float));
  float* out = reinterpret_cast<float*>(bytes.data());
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      out[i * data.cols() + j] = static_cast<float>(data(i, j));
  atomic_write_file(path, bytes);

  json sidecar;
  sidecar["n_samples"] = meta.n_samples;
  sidecar["row_length"] = meta.row_length;
  sidecar["scheme_path"] = meta.scheme_path;
  if (meta.basis) {
    sidecar["basis"] = {{"N", meta.basis->N}, {"zeta", meta.basis->zeta}};
  } else {
    sidecar["basis"] = nullptr;
  }
  sidecar["dtype"] = "float32";
  sidecar["order"] = "sample-major";
  write_json(path + ".json", sidecar);
}

Eigen::MatrixXd read_volume(const std::string& path, VolumeMeta* meta_out) {
  const json sidecar = read_json(path + ".json");
  VolumeMeta meta;
  try {
    meta.n_samples = sidecar.at("n_samples");
    meta.row_length = sidecar.at("row_length");
    meta.scheme_path = sidecar.at("scheme_path");
    if (!sidecar.at("basis").is_null()) {
      BasisId b;
      b.N = sidecar.at("basis").at("N");
      b.zeta = sidecar.at("basis").at("zeta");
      meta.basis = b;
    }
    if (sidecar.at("dtype") != "float32" || sidecar.at("order") != "sample-major")
      throw std::runtime_error("unsupported dtype/order");
  } catch (const json::exception& e) {
    throw std::runtime_error("read_volume: bad sidecar for " + path + ": " + e.what());
  }
  if (meta.n_samples < 0 || meta.row_length <= 0)
    throw std::runtime_error("read_volume: invalid shape in sidecar of " + path);

  const std::string bytes = read_file(path);
  const size_t expected =
      static_cast<size_t>(meta.n_samples) * static_cast<size_t>(meta.row_length) * sizeof(float);
  if (bytes.size() != expected)
    throw std::runtime_error("read_volume: " + path + " has " +
                             std::to_string(bytes.size()) + " bytes, sidecar implies " +
                             std::to_string(expected));
  Eigen::MatrixXd data(meta.n_samples, meta.row_length);
  const float* in = reinterpret_cast<const float*>(bytes.data());
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      data(i, j) = static_cast<double>(in[i * data.cols() + j]);
  if (meta_out) *meta_out = meta;
  return data;
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace leape
