#include "leape/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "leape/rng.hpp"

namespace leape {

using nlohmann::json;

MlpParams init_params(const std::vector<int>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2)
    throw std::invalid_argument("init_params: need at least input and output dims");
  for (int d : layer_dims)
    if (d <= 0) throw std::invalid_argument("init_params: dims must be positive");
  MlpParams p;
  p.layer_dims = layer_dims;
  Rng rng(seed);
  for (size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    const int fan_in = layer_dims[i], fan_out = layer_dims[i + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd W(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) W(r, c) = rng.uniform_in(-limit, limit);
    p.W.push_back(std::move(W));
    p.b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return p;
}

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& X,
                        ForwardCache* cache) {
  if (X.cols() != params.input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
  if (cache) {
    cache->acts.clear();
    cache->acts.reserve(params.W.size() + 1);
    cache->acts.push_back(X);
  }
  Eigen::MatrixXd a = X;
  const int L = params.layer_count();
  for (int i = 0; i < L; ++i) {
    Eigen::MatrixXd z = a * params.W[static_cast<size_t>(i)].transpose();
    z.rowwise() += params.b[static_cast<size_t>(i)].transpose();
    if (i + 1 < L) z = z.cwiseMax(0.0);  // rectifier on hidden layers
    a = std::move(z);
    if (cache) cache->acts.push_back(a);
  }
  return a;
}

MlpGrads backward(const MlpParams& params, const ForwardCache& cache,
                  const Eigen::MatrixXd& d_output, Eigen::MatrixXd* d_input) {
  const int L = params.layer_count();
  if (static_cast<int>(cache.acts.size()) != L + 1)
    throw std::invalid_argument("backward: cache does not match network depth");
  if (d_output.rows() != cache.acts.back().rows() ||
      d_output.cols() != cache.acts.back().cols())
    throw std::invalid_argument("backward: upstream gradient shape mismatch");

  MlpGrads g;
  g.W.resize(static_cast<size_t>(L));
  g.b.resize(static_cast<size_t>(L));
  Eigen::MatrixXd delta = d_output;  // dL/dz of the current layer
  for (int i = L - 1; i >= 0; --i) {
    if (i + 1 < L) {
      // Through the rectifier: active where the layer output is > 0.
      const Eigen::MatrixXd& out = cache.acts[static_cast<size_t>(i) + 1];
      delta = delta.cwiseProduct(
          (out.array() > 0.0).cast<double>().matrix());
    }
    const Eigen::MatrixXd& in = cache.acts[static_cast<size_t>(i)];
    g.W[static_cast<size_t>(i)] = delta.transpose() * in;
    g.b[static_cast<size_t>(i)] = delta.colwise().sum().transpose();
    if (i > 0 || d_input)
      delta = (delta * params.W[static_cast<size_t>(i)]).eval();
  }
  if (d_input) *d_input = delta;
  return g;
}

AdamState AdamState::like(const MlpParams& params) {
  AdamState s;
  for (const auto& W : params.W) {
    s.mW.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
    s.vW.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
  }
  for (const auto& b : params.b) {
    s.mb.push_back(Eigen::VectorXd::Zero(b.size()));
    s.vb.push_back(Eigen::VectorXd::Zero(b.size()));
  }
  return s;
}

namespace {
template <typename T>
void adam_update(T& p, const T& g, T& m, T& v, double lr, double b1, double b2,
                 double eps, double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
  const T mhat = m / bc1;
  const T vhat = v / bc2;
  p -= lr * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps).matrix());
}
}  // namespace

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state,
               double lr) {
  if (grads.W.size() != params.W.size() || grads.b.size() != params.b.size())
    throw std::invalid_argument("adam_step: gradient/parameter shape mismatch");
  for (size_t i = 0; i < params.W.size(); ++i)
    if (grads.W[i].rows() != params.W[i].rows() ||
        grads.W[i].cols() != params.W[i].cols() ||
        grads.b[i].size() != params.b[i].size())
      throw std::invalid_argument("adam_step: gradient/parameter shape mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.W.size(); ++i) {
    adam_update(params.W[i], grads.W[i], state.mW[i], state.vW[i], lr,
                state.beta1, state.beta2, state.eps, bc1, bc2);
    adam_update(params.b[i], grads.b[i], state.mb[i], state.vb[i], lr,
                state.beta1, state.beta2, state.eps, bc1, bc2);
  }
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                Eigen::MatrixXd* d_pred) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("mse_loss: shape mismatch");
  const double count = static_cast<double>(pred.size());
  const Eigen::MatrixXd diff = pred - target;
  if (d_pred) *d_pred = 2.0 * diff / count;
  return diff.squaredNorm() / count;
}

double composite_loss(const Eigen::MatrixXd& chat, const Eigen::MatrixXd& c,
                      const Eigen::VectorXd& efo, double alpha,
                      Eigen::MatrixXd* d_chat, Eigen::VectorXd* d_efo) {
  if (chat.rows() != c.rows() || chat.cols() != c.cols())
    throw std::invalid_argument("composite_loss: coefficient shape mismatch");
  if (efo.size() != chat.rows())
    throw std::invalid_argument("composite_loss: one FO error per sample required");
  if (alpha < 0.0) throw std::invalid_argument("composite_loss: alpha < 0");
  const Eigen::MatrixXd diff = chat - c;
  if (d_chat) *d_chat = 2.0 * alpha * diff;
  if (d_efo) *d_efo = Eigen::VectorXd::Ones(efo.size());
  return alpha * diff.squaredNorm() + efo.sum();
}

// ---------------------------------------------------------------------------
// Serialization: "LEAPEMDL" magic, u32 version, u64 manifest length, manifest
// JSON, raw little-endian float64 blob (row-major per weight matrix, biases
// after their matrix, nets in order).

namespace {
constexpr char kMagic[8] = {'L', 'E', 'A', 'P', 'E', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

void append_raw(std::string& out, const void* p, size_t n) {
  out.append(static_cast<const char*>(p), n);
}

void append_doubles(std::string& out, const double* p, size_t n) {
  // Little-endian hosts write directly (all supported targets are LE).
  append_raw(out, p, n * sizeof(double));
}
}  // namespace

std::string save_model(const std::vector<MlpParams>& nets, const json& meta) {
  json manifest;
  manifest["meta"] = meta;
  manifest["float_format"] = "little-endian float64";
  json net_dims = json::array();
  size_t n_doubles = 0;
  for (const MlpParams& p : nets) {
    net_dims.push_back(json{{"dims", p.layer_dims},
                            {"hidden_activation", "relu"},
                            {"output_activation", "identity"}});
    for (const auto& W : p.W) n_doubles += static_cast<size_t>(W.size());
    for (const auto& b : p.b) n_doubles += static_cast<size_t>(b.size());
  }
  manifest["nets"] = net_dims;
  manifest["blob_doubles"] = n_doubles;

  const std::string mtext = manifest.dump();  // keys in canonical (sorted) order
  std::string out;
  out.reserve(sizeof(kMagic) + 12 + mtext.size() + n_doubles * sizeof(double));
  append_raw(out, kMagic, sizeof(kMagic));
  const std::uint32_t version = kVersion;
  append_raw(out, &version, sizeof(version));
  const std::uint64_t mlen = mtext.size();
  append_raw(out, &mlen, sizeof(mlen));
  out += mtext;
  for (const MlpParams& p : nets) {
    for (const auto& W : p.W) {
      // Serialize row-major regardless of Eigen's storage order.
      for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) {
          const double v = W(r, c);
          append_doubles(out, &v, 1);
        }
    }
    for (const auto& b : p.b) append_doubles(out, b.data(), static_cast<size_t>(b.size()));
  }
  return out;
}

void load_model(const std::string& bytes, std::vector<MlpParams>& nets,
                json& meta) {
  if (bytes.size() < sizeof(kMagic) + 12)
    throw std::runtime_error("load_model: truncated model container");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_model: bad magic (not a model file)");
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + sizeof(kMagic), sizeof(version));
  if (version != kVersion)
    throw std::runtime_error("load_model: unsupported container version " +
                             std::to_string(version));
  std::uint64_t mlen = 0;
  std::memcpy(&mlen, bytes.data() + sizeof(kMagic) + 4, sizeof(mlen));
  const size_t header = sizeof(kMagic) + 12;
  if (bytes.size() < header + mlen)
    throw std::runtime_error("load_model: manifest extends past end of file");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(header, mlen));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("load_model: bad manifest JSON: ") +
                             e.what());
  }
  meta = manifest.at("meta");
  const std::uint64_t blob_doubles = manifest.at("blob_doubles");
  if (bytes.size() != header + mlen + blob_doubles * sizeof(double))
    throw std::runtime_error("load_model: blob length mismatch");

  const char* blob = bytes.data() + header + mlen;
  size_t off = 0;
  auto next_double = [&]() {
    double v;
    std::memcpy(&v, blob + off, sizeof(double));
    off += sizeof(double);
    return v;
  };
  nets.clear();
  for (const auto& net_json : manifest.at("nets")) {
    MlpParams p;
    p.layer_dims = net_json.at("dims").get<std::vector<int>>();
    if (net_json.at("hidden_activation") != "relu" ||
        net_json.at("output_activation") != "identity")
      throw std::runtime_error("load_model: unsupported activation");
    if (p.layer_dims.size() < 2)
      throw std::runtime_error("load_model: net with fewer than 2 layer dims");
    for (size_t i = 0; i + 1 < p.layer_dims.size(); ++i) {
      Eigen::MatrixXd W(p.layer_dims[i + 1], p.layer_dims[i]);
      for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = next_double();
      p.W.push_back(std::move(W));
    }
    for (size_t i = 0; i + 1 < p.layer_dims.size(); ++i) {
      Eigen::VectorXd b(p.layer_dims[i + 1]);
      for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = next_double();
      p.b.push_back(std::move(b));
    }
    nets.push_back(std::move(p));
  }
  if (off != blob_doubles * sizeof(double))
    throw std::runtime_error("load_model: net dims inconsistent with blob size");
}

std::string save_model(const MlpParams& params, const json& meta) {
  return save_model(std::vector<MlpParams>{params}, meta);
}

MlpParams load_single_model(const std::string& bytes, json& meta) {
  std::vector<MlpParams> nets;
  load_model(bytes, nets, meta);
  if (nets.size() != 1)
    throw std::runtime_error("load_single_model: container holds " +
                             std::to_string(nets.size()) + " nets, expected 1");
  return nets[0];
}

}  // namespace leape
