#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

// Minimal feedforward network machinery: rectifier hidden layers, identity
// output, exact reverse-mode gradients (including gradients w.r.t. the
// input, needed to chain a frozen downstream net into an upstream one),
// Adam, losses, and a versioned serialization container.
//
// Batches are row-major: X is (batch x dim_in), outputs (batch x dim_out).
// All training math is double precision.

namespace leape {

struct MlpParams {
  std::vector<int> layer_dims;        // input, hidden..., output
  std::vector<Eigen::MatrixXd> W;     // W[i] is (dims[i+1] x dims[i])
  std::vector<Eigen::VectorXd> b;     // b[i] is (dims[i+1])

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  int layer_count() const { return static_cast<int>(W.size()); }
};

// Glorot-uniform weights (U[-sqrt(6/(fan_in+fan_out)), +...]), zero biases;
// deterministic given seed.  Requires >= 2 positive dims.
MlpParams init_params(const std::vector<int>& layer_dims, std::uint64_t seed);

// Forward-pass cache: inputs/activations of every layer, for backward().
struct ForwardCache {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] = X, acts[i] = output of layer i
};

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& X,
                        ForwardCache* cache = nullptr);

struct MlpGrads {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
};

// Exact reverse-mode gradients.  d_output is dL/d(forward output); returns
// parameter gradients and, if d_input is non-null, dL/dX.  The rectifier
// subgradient at 0 is taken as 0.
MlpGrads backward(const MlpParams& params, const ForwardCache& cache,
                  const Eigen::MatrixXd& d_output,
                  Eigen::MatrixXd* d_input = nullptr);

struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState like(const MlpParams& params);
};

// Standard Adam update with bias correction; increments state.t.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state,
               double lr);

// Mean of squared differences over all entries; gradient w.r.t. pred.
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                Eigen::MatrixXd* d_pred = nullptr);

// Composite training objective, summed over the batch:
//   sum_i [ alpha * ||chat_i - c_i||^2 + efo_i ].
// Gradients: d/dchat = 2 alpha (chat - c), d/defo = 1 per sample.
double composite_loss(const Eigen::MatrixXd& chat, const Eigen::MatrixXd& c,
                      const Eigen::VectorXd& efo, double alpha,
                      Eigen::MatrixXd* d_chat = nullptr,
                      Eigen::VectorXd* d_efo = nullptr);

// Versioned model container: magic + version + JSON manifest + little-endian
// float64 parameter blob.  Round-trips bit-exactly; throws std::runtime_error
// on bad magic, unknown version, or length mismatches.
std::string save_model(const std::vector<MlpParams>& nets,
                       const nlohmann::json& meta);
void load_model(const std::string& bytes, std::vector<MlpParams>& nets,
                nlohmann::json& meta);

// Single-network convenience wrappers.
std::string save_model(const MlpParams& params, const nlohmann::json& meta);
MlpParams load_single_model(const std::string& bytes, nlohmann::json& meta);

}  // namespace leape
