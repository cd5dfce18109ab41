#include "leape/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "leape/eval.hpp"
#include "leape/fit.hpp"
#include "leape/io.hpp"
#include "leape/mlp.hpp"
#include "leape/phantom.hpp"
#include "leape/pipeline.hpp"
#include "leape/rng.hpp"

namespace leape {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flags or config values -> exit 2; anything else thrown -> exit 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kTagScheme = 0xA001;
constexpr std::uint64_t kTagTrainSet = 0xA010;
constexpr std::uint64_t kTagTestSet = 0xA011;

// ---------------------------------------------------------------------------
// Config handling: a single JSON object; explicit flags override config keys.

json load_config(const std::string& path, const std::set<std::string>& allowed) {
  if (path.empty()) return json::object();
  json cfg = read_json(path);
  if (!cfg.is_object())
    throw UsageError("config must be a JSON object: " + path);
  for (const auto& item : cfg.items())
    if (allowed.find(item.key()) == allowed.end())
      throw UsageError("unknown config key \"" + item.key() + "\" in " + path);
  return cfg;
}

template <typename T>
void overlay(const json& cfg, const char* key, const CLI::Option* opt, T& out) {
  if (opt != nullptr && opt->count() > 0) return;  // explicit flag wins
  const auto it = cfg.find(key);
  if (it == cfg.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key \"") + key + "\": " + e.what());
  }
}

std::uint64_t require_seed(const json& cfg, const CLI::Option* opt,
                           std::uint64_t flag_value) {
  if (opt->count() > 0) return flag_value;
  const auto it = cfg.find("seed");
  if (it == cfg.end())
    throw UsageError("--seed is required (flag or config key \"seed\")");
  if (!it->is_number_integer() && !it->is_number_unsigned())
    throw UsageError("config key \"seed\": must be a non-negative integer");
  if (it->is_number_integer() && it->get<std::int64_t>() < 0)
    throw UsageError("config key \"seed\": must be a non-negative integer");
  return it->get<std::uint64_t>();
}

// SNR levels: positive numbers, with "inf" for the noise-free level.
double parse_snr_token(const json& v) {
  double snr = 0.0;
  if (v.is_string()) {
    if (v.get<std::string>() == "inf")
      snr = std::numeric_limits<double>::infinity();
    else
      throw UsageError("snr: string values must be \"inf\", got \"" +
                       v.get<std::string>() + "\"");
  } else if (v.is_number()) {
    snr = v.get<double>();
  } else {
    throw UsageError("snr: expected number or \"inf\"");
  }
  if (!(snr > 0.0)) throw UsageError("snr: levels must be positive");
  return snr;
}

std::vector<double> parse_snr_list(const json& v) {
  std::vector<double> out;
  if (v.is_array())
    for (const json& x : v) out.push_back(parse_snr_token(x));
  else
    out.push_back(parse_snr_token(v));
  if (out.empty()) throw UsageError("snr: empty list");
  return out;
}

json snr_to_json(const std::vector<double>& snr) {
  json arr = json::array();
  for (double s : snr)
    if (std::isinf(s))
      arr.push_back("inf");
    else
      arr.push_back(s);
  return arr;
}

json basis_to_json(const BasisId& b) {
  return json{{"N", b.N}, {"zeta", b.zeta}};
}

json peak_to_json(const PeakConfig& p) {
  return json{{"relative_threshold", p.relative_threshold},
              {"min_sep_angle_deg", p.min_sep_angle},
              {"max_peaks", p.max_peaks}};
}

json train_log_to_json(const TrainLog& log) {
  return json{{"train_loss", log.train_loss},
              {"val_loss", log.val_loss},
              {"best_epoch", log.best_epoch}};
}

void check_basis_params(int order, double zeta) {
  if (order < 0 || order % 2 != 0)
    throw UsageError("--order must be an even non-negative integer");
  if (!(zeta > 0.0)) throw UsageError("--zeta must be positive");
}

std::string file_fingerprint(const std::string& path) {
  return fnv1a64_hex(read_file(path));
}

// Resolve a (possibly relative) path stored in a sidecar against the
// directory of the file that carries it.
std::string resolve_sibling(const std::string& anchor_file,
                            const std::string& stored_path) {
  const fs::path p(stored_path);
  if (p.is_absolute()) return stored_path;
  return (fs::path(anchor_file).parent_path() / p).string();
}

// Positions of the rows of `sparse` inside `dense` (exact (dir, b) match;
// both files come from the same generator, so values are bit-identical).
std::vector<int> match_subscheme(const GradientScheme& dense,
                                 const GradientScheme& sparse) {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(sparse.size()));
  for (int k = 0; k < sparse.size(); ++k) {
    const SchemeEntry& e = sparse.entries[static_cast<size_t>(k)];
    int found = -1;
    for (int j = 0; j < dense.size(); ++j) {
      const SchemeEntry& d = dense.entries[static_cast<size_t>(j)];
      if (d.b == e.b && d.dir == e.dir) {
        if (found >= 0)
          throw std::runtime_error(
              "sparse scheme entry " + std::to_string(k) +
              " matches multiple dense scheme entries (duplicate samples)");
        found = j;
      }
    }
    if (found < 0)
      throw std::runtime_error("sparse scheme entry " + std::to_string(k) +
                               " is not a sample of the dense scheme");
    out.push_back(found);
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int n_train = 50000;
  int n_test = 5000;
  std::vector<double> snr = {std::numeric_limits<double>::infinity(), 30.0,
                             20.0};
};

struct GeneratedSet {
  Eigen::MatrixXd dense;
  Eigen::MatrixXd sparse;
  json truth;
};

GeneratedSet generate_set(std::uint64_t base, int n, const SchemePair& pair,
                          const std::vector<double>& snr_levels) {
  GeneratedSet out;
  out.dense.resize(n, pair.dense.size());
  out.sparse.resize(n, pair.sparse.size());
  json samples = json::array();
  for (int i = 0; i < n; ++i) {
    const std::uint64_t u = static_cast<std::uint64_t>(i);
    const TensorMixture mix = sample_mixture(derive_seed(base, 3 * u));
    double snr = snr_levels[0];
    if (snr_levels.size() > 1) {
      Rng pick(derive_seed(base, 3 * u + 1));
      snr = snr_levels[static_cast<size_t>(
          pick.index(static_cast<int>(snr_levels.size())))];
    }
    const Eigen::VectorXd clean = simulate_signal(mix, pair.dense);
    const Eigen::VectorXd noisy =
        add_rician_noise(clean, snr, derive_seed(base, 3 * u + 2));
    out.dense.row(i) = noisy.transpose();
    for (size_t k = 0; k < pair.sparse_indices.size(); ++k)
      out.sparse(i, static_cast<Eigen::Index>(k)) =
          noisy[pair.sparse_indices[k]];

    const GroundTruthFeatures gt = ground_truth_features(mix);
    json comps = json::array();
    for (const TensorCompartment& c : mix.compartments)
      comps.push_back(json{{"fraction", c.fraction},
                           {"lambdas", {c.lambdas.x(), c.lambdas.y(), c.lambdas.z()}},
                           {"axis", {c.axis.x(), c.axis.y(), c.axis.z()}}});
    json fo = json::array();
    for (const Eigen::Vector3d& f : gt.fos.fos)
      fo.push_back(json{f.x(), f.y(), f.z()});
    samples.push_back(json{{"anisotropic", !gt.fos.empty()},
                           {"compartments", comps},
                           {"fo", fo},
                           {"msd", gt.msd},
                           {"rtop", gt.rtop},
                           {"snr", std::isinf(snr) ? json("inf") : json(snr)}});
  }
  out.truth = json{{"n_samples", n}, {"samples", samples}};
  return out;
}

int cmd_simulate(const SimulateOptions& opt) {
  if (opt.n_train < 1 || opt.n_test < 1)
    throw UsageError("n_train and n_test must be >= 1");

  fs::create_directories(opt.out_dir);
  const fs::path out(opt.out_dir);

  const SchemePair pair = make_hcp_like_scheme(derive_seed(opt.seed, kTagScheme));
  save_scheme(pair.dense, (out / "scheme_dense.txt").string());
  save_scheme(pair.sparse, (out / "scheme_sparse.txt").string());

  const GeneratedSet train = generate_set(derive_seed(opt.seed, kTagTrainSet),
                                          opt.n_train, pair, opt.snr);
  const GeneratedSet test = generate_set(derive_seed(opt.seed, kTagTestSet),
                                         opt.n_test, pair, opt.snr);

  auto write_set = [&](const GeneratedSet& s, const std::string& stem) {
    VolumeMeta dense_meta{s.dense.rows(), s.dense.cols(), "scheme_dense.txt",
                          std::nullopt};
    write_volume((out / (stem + "_dense.f32")).string(), s.dense, dense_meta);
    VolumeMeta sparse_meta{s.sparse.rows(), s.sparse.cols(),
                           "scheme_sparse.txt", std::nullopt};
    write_volume((out / (stem + "_sparse.f32")).string(), s.sparse,
                 sparse_meta);
    write_json((out / ("truth_" + stem + ".json")).string(), s.truth);
  };
  write_set(train, "train");
  write_set(test, "test");

  const json manifest{
      {"files",
       {{"scheme_dense", "scheme_dense.txt"},
        {"scheme_sparse", "scheme_sparse.txt"},
        {"train_dense", "train_dense.f32"},
        {"train_sparse", "train_sparse.f32"},
        {"test_dense", "test_dense.f32"},
        {"test_sparse", "test_sparse.f32"},
        {"truth_train", "truth_train.json"},
        {"truth_test", "truth_test.json"}}},
      {"n_test", opt.n_test},
      {"n_train", opt.n_train},
      {"schemes",
       {{"dense",
         {{"fnv1a64", file_fingerprint((out / "scheme_dense.txt").string())},
          {"n_samples", pair.dense.size()}}},
        {"sparse",
         {{"fnv1a64", file_fingerprint((out / "scheme_sparse.txt").string())},
          {"n_samples", pair.sparse.size()}}}}},
      {"seed", opt.seed},
      {"snr", snr_to_json(opt.snr)}};
  write_json((out / "corpus.json").string(), manifest);
  std::cout << "corpus written to " << opt.out_dir << " (" << opt.n_train
            << " train / " << opt.n_test << " test samples)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
  std::string config_path, scheme_path, signals_path, out_path;
  double lambda_n = 1e-8, lambda_l = 1e-8;
  double zeta = 700.0;
  int order = 6;
};

int cmd_fit(const FitOptions& opt) {
  check_basis_params(opt.order, opt.zeta);
  if (opt.lambda_n < 0.0 || opt.lambda_l < 0.0)
    throw UsageError("regularization weights must be >= 0");

  const GradientScheme scheme = load_scheme(opt.scheme_path);
  VolumeMeta meta;
  const Eigen::MatrixXd Y = read_volume(opt.signals_path, &meta);
  if (meta.row_length != scheme.size())
    throw std::runtime_error(
        "signal row length (" + std::to_string(meta.row_length) +
        ") does not match scheme size (" + std::to_string(scheme.size()) + ")");

  const ShoreBasis basis = ShoreBasis::make(opt.order, opt.zeta);
  const ShoreFitter fitter(scheme, basis, FitConfig{opt.lambda_n, opt.lambda_l});
  Eigen::MatrixXd C(Y.rows(), basis.n_c);
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    C.row(i) = fitter.fit(Y.row(i).transpose()).transpose();

  VolumeMeta out_meta{C.rows(), C.cols(), opt.scheme_path,
                      BasisId{opt.order, opt.zeta}};
  write_volume(opt.out_path, C, out_meta);
  std::cout << "fit " << Y.rows() << " samples -> " << opt.out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string config_path, corpus_path, scheme_dense_path, scheme_sparse_path,
      out_path;
  std::uint64_t seed = 0;
  bool ablation_mse_only = false;
  TrainingConfig training;
  double lambda_n = 1e-8, lambda_l = 1e-8;
  double zeta = 700.0;
  int order = 6;
  int odf_dir_count = 100;
};

int cmd_train(const TrainOptions& opt) {
  check_basis_params(opt.order, opt.zeta);
  if (opt.lambda_n < 0.0 || opt.lambda_l < 0.0)
    throw UsageError("regularization weights must be >= 0");
  if (opt.odf_dir_count < 1) throw UsageError("odf_dir_count must be >= 1");
  TrainingConfig cfg = opt.training;
  cfg.seed = opt.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const GradientScheme dense = load_scheme(opt.scheme_dense_path);
  const GradientScheme sparse = load_scheme(opt.scheme_sparse_path);
  const std::vector<int> sparse_indices = match_subscheme(dense, sparse);

  VolumeMeta meta;
  const Eigen::MatrixXd Y = read_volume(opt.corpus_path, &meta);
  if (meta.row_length != dense.size())
    throw std::runtime_error(
        "corpus row length (" + std::to_string(meta.row_length) +
        ") does not match dense scheme size (" + std::to_string(dense.size()) +
        ")");

  const ShoreBasis basis = ShoreBasis::make(opt.order, opt.zeta);
  const PipelineContext ctx = PipelineContext::make(basis, opt.odf_dir_count);
  const FitConfig fit_cfg{opt.lambda_n, opt.lambda_l};

  std::cout << "building training set (" << Y.rows() << " samples)...\n";
  const std::vector<TrainingSample> samples =
      build_training_set(Y, dense, sparse_indices, ctx, fit_cfg);

  std::cout << (opt.ablation_mse_only
                    ? "training MSE-only baseline...\n"
                    : "training (3-step schedule)...\n");
  const TrainOutcome outcome =
      train_leape(samples, ctx, cfg, opt.ablation_mse_only);

  json logs{{"step1", train_log_to_json(outcome.log_step1)}};
  if (!outcome.ablation) {
    logs["step2"] = train_log_to_json(outcome.log_step2);
    logs["step3"] = train_log_to_json(outcome.log_step3);
  }
  const json meta_json{
      {"kind", outcome.ablation ? "mse_only" : "leape"},
      {"basis", basis_to_json(BasisId{opt.order, opt.zeta})},
      {"fit", {{"lambda_n", opt.lambda_n}, {"lambda_l", opt.lambda_l}}},
      {"training",
       {{"alpha", cfg.alpha},
        {"lr", cfg.lr},
        {"batch_size", cfg.batch_size},
        {"epochs_step1", cfg.epochs_step1},
        {"epochs_step2", cfg.epochs_step2},
        {"epochs_step3", cfg.epochs_step3},
        {"val_fraction", cfg.val_fraction},
        {"seed", cfg.seed},
        {"hidden_dims", cfg.hidden_dims}}},
      {"odf_dir_count", opt.odf_dir_count},
      {"peak", peak_to_json(ctx.peak_cfg)},
      {"input",
       {{"dim", samples.empty() ? 0 : static_cast<int>(samples[0].y_sparse.size())},
        {"signals",
         "diffusion-weighted (b > 0) entries of the sparse scheme, in scheme "
         "order"}}},
      {"fo_error_units", "degrees"},
      {"schemes",
       {{"dense",
         {{"path", opt.scheme_dense_path},
          {"fnv1a64", file_fingerprint(opt.scheme_dense_path)}}},
        {"sparse",
         {{"path", opt.scheme_sparse_path},
          {"fnv1a64", file_fingerprint(opt.scheme_sparse_path)}}}}},
      {"logs", logs}};

  atomic_write_file(opt.out_path, save_model(outcome.nets, meta_json));
  write_json(opt.out_path + ".log.json",
             json{{"kind", meta_json.at("kind")}, {"logs", logs}});
  std::cout << "model written to " << opt.out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
  std::string config_path, model_path, signals_path, out_path;
};

int cmd_predict(const PredictOptions& opt) {
  std::vector<MlpParams> nets;
  json meta;
  load_model(read_file(opt.model_path), nets, meta);
  if (nets.empty()) throw std::runtime_error("model contains no networks");
  const MlpParams& mlp1 = nets[0];

  VolumeMeta vol_meta;
  const Eigen::MatrixXd Y = read_volume(opt.signals_path, &vol_meta);
  const std::string scheme_path =
      resolve_sibling(opt.signals_path, vol_meta.scheme_path);
  const GradientScheme scheme = load_scheme(scheme_path);
  if (scheme.size() != vol_meta.row_length)
    throw std::runtime_error("signals row length does not match their scheme");

  const std::string scheme_hash = file_fingerprint(scheme_path);
  const std::string model_hash =
      meta.at("schemes").at("sparse").at("fnv1a64").get<std::string>();
  if (scheme_hash != model_hash)
    throw std::runtime_error(
        "signals' scheme does not match the scheme the model was trained on "
        "(fingerprint " + scheme_hash + " vs " + model_hash + ")");

  const std::vector<int> dw = scheme.dw_indices();
  if (static_cast<int>(dw.size()) != mlp1.input_dim())
    throw std::runtime_error(
        "scheme has " + std::to_string(dw.size()) +
        " diffusion-weighted samples but the model expects " +
        std::to_string(mlp1.input_dim()));

  Eigen::MatrixXd X(Y.rows(), static_cast<Eigen::Index>(dw.size()));
  for (size_t k = 0; k < dw.size(); ++k) X.col(static_cast<Eigen::Index>(k)) = Y.col(dw[k]);
  const Eigen::MatrixXd C = predict(mlp1, X);

  const BasisId basis{meta.at("basis").at("N").get<int>(),
                      meta.at("basis").at("zeta").get<double>()};
  if (C.cols() != shore_coeff_count(basis.N))
    throw std::runtime_error("model output dimension does not match its basis");
  VolumeMeta out_meta{C.rows(), C.cols(), vol_meta.scheme_path, basis};
  write_volume(opt.out_path, C, out_meta);
  std::cout << "predicted " << C.rows() << " samples -> " << opt.out_path
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string config_path, gold_path, truth_path, report_path;
  std::vector<std::string> pred_specs;  // "name=path"
};

int cmd_evaluate(const EvaluateOptions& opt) {
  std::vector<std::pair<std::string, std::string>> preds;
  std::set<std::string> names;
  for (const std::string& spec : opt.pred_specs) {
    const size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw UsageError("--pred expects NAME=PATH, got \"" + spec + "\"");
    const std::string name = spec.substr(0, eq);
    if (!names.insert(name).second)
      throw UsageError("duplicate --pred name \"" + name + "\"");
    preds.emplace_back(name, spec.substr(eq + 1));
  }
  if (preds.empty()) throw UsageError("at least one --pred NAME=PATH required");

  VolumeMeta gold_meta;
  const Eigen::MatrixXd gold_coefs = read_volume(opt.gold_path, &gold_meta);
  if (!gold_meta.basis)
    throw std::runtime_error(
        "gold volume lacks basis metadata (not a coefficient volume?)");
  const BasisId basis = *gold_meta.basis;

  const ShoreBasis shore = ShoreBasis::make(basis.N, basis.zeta);
  if (gold_meta.row_length != shore.n_c)
    throw std::runtime_error("gold row length does not match its basis");
  const PipelineContext ctx = PipelineContext::make(shore);

  std::vector<GoldFeatures> gold(static_cast<size_t>(gold_coefs.rows()));
  for (Eigen::Index i = 0; i < gold_coefs.rows(); ++i) {
    const SampleFeatures f =
        extract_features(gold_coefs.row(i).transpose(), ctx);
    gold[static_cast<size_t>(i)] =
        GoldFeatures{f.msd, f.rtop, f.fo, /*anisotropic=*/true};
  }

  json truth_echo;
  if (!opt.truth_path.empty()) {
    const json truth = read_json(opt.truth_path);
    const json& samples = truth.at("samples");
    if (static_cast<Eigen::Index>(samples.size()) != gold_coefs.rows())
      throw std::runtime_error(
          "truth file sample count does not match gold volume");
    for (size_t i = 0; i < samples.size(); ++i)
      gold[i].anisotropic = samples[i].at("anisotropic").get<bool>();
    truth_echo = json{{"path", opt.truth_path},
                      {"fnv1a64", file_fingerprint(opt.truth_path)}};
  } else {
    truth_echo = nullptr;
  }

  std::vector<MethodErrors> methods;
  json preds_echo = json::array();
  for (const auto& [name, path] : preds) {
    VolumeMeta m;
    const Eigen::MatrixXd coefs = read_volume(path, &m);
    if (coefs.rows() != gold_coefs.rows())
      throw std::runtime_error("prediction \"" + name +
                               "\" has a different sample count than gold");
    if (!m.basis || m.basis->N != basis.N || m.basis->zeta != basis.zeta)
      throw std::runtime_error("prediction \"" + name +
                               "\" basis does not match the gold basis");
    methods.push_back(method_errors(name, coefs, gold, ctx));
    preds_echo.push_back(
        json{{"name", name}, {"path", path}, {"fnv1a64", file_fingerprint(path)}});
  }

  const EvalReport report = evaluate_methods(methods);
  json j = report_to_json(report);
  j["config"] = json{
      {"basis", basis_to_json(basis)},
      {"gold",
       {{"path", opt.gold_path}, {"fnv1a64", file_fingerprint(opt.gold_path)}}},
      {"peak", peak_to_json(ctx.peak_cfg)},
      {"preds", preds_echo},
      {"truth", truth_echo}};
  write_json(opt.report_path, j);

  std::string text_path = opt.report_path;
  const std::string suffix = ".json";
  if (text_path.size() > suffix.size() &&
      text_path.compare(text_path.size() - suffix.size(), suffix.size(),
                        suffix) == 0)
    text_path.resize(text_path.size() - suffix.size());
  text_path += ".txt";
  const std::string text = report_to_text(report);
  atomic_write_file(text_path, text);
  std::cout << text;
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"propagator reconstruction and learning toolkit for q-space "
               "diffusion MRI"};
  app.require_subcommand(1);

  SimulateOptions sim;
  TrainOptions trn;
  FitOptions fit;
  PredictOptions prd;
  EvaluateOptions evl;
  std::vector<std::string> sim_snr_tokens;

  CLI::App* c_sim = app.add_subcommand(
      "simulate", "generate a synthetic multi-tensor corpus");
  c_sim->add_option("--config", sim.config_path, "JSON config file");
  c_sim->add_option("--out", sim.out_dir, "output directory")->required();
  const CLI::Option* sim_seed = c_sim->add_option("--seed", sim.seed, "RNG seed");
  const CLI::Option* sim_ntr =
      c_sim->add_option("--n-train", sim.n_train, "training samples");
  const CLI::Option* sim_nte =
      c_sim->add_option("--n-test", sim.n_test, "test samples");
  const CLI::Option* sim_snr =
      c_sim->add_option("--snr", sim_snr_tokens,
                        "SNR levels (numbers or \"inf\"), sampled per voxel")
          ->delimiter(',');

  CLI::App* c_fit = app.add_subcommand(
      "fit", "least-squares coefficient estimation on a scheme");
  c_fit->add_option("--config", fit.config_path, "JSON config file");
  c_fit->add_option("--scheme", fit.scheme_path, "scheme file")->required();
  c_fit->add_option("--signals", fit.signals_path, "signal volume")->required();
  c_fit->add_option("--out", fit.out_path, "output coefficient volume")
      ->required();
  const CLI::Option* fit_ln =
      c_fit->add_option("--lambda-n", fit.lambda_n, "radial regularization");
  const CLI::Option* fit_ll =
      c_fit->add_option("--lambda-l", fit.lambda_l, "angular regularization");
  const CLI::Option* fit_ze = c_fit->add_option("--zeta", fit.zeta, "scale");
  const CLI::Option* fit_or =
      c_fit->add_option("--order", fit.order, "max radial order (even)");

  CLI::App* c_trn = app.add_subcommand("train", "train the two-MLP pipeline");
  c_trn->add_option("--config", trn.config_path, "JSON config file");
  c_trn->add_option("--corpus", trn.corpus_path,
                    "dense-scheme training signal volume")
      ->required();
  c_trn->add_option("--scheme-dense", trn.scheme_dense_path, "dense scheme")
      ->required();
  c_trn->add_option("--scheme-sparse", trn.scheme_sparse_path, "sparse scheme")
      ->required();
  c_trn->add_option("--out", trn.out_path, "output model file")->required();
  const CLI::Option* trn_seed = c_trn->add_option("--seed", trn.seed, "RNG seed");
  const CLI::Option* trn_abl = c_trn->add_flag(
      "--ablation-mse-only", trn.ablation_mse_only,
      "train the compute-matched MSE-only baseline instead");
  const CLI::Option* trn_al =
      c_trn->add_option("--alpha", trn.training.alpha, "composite loss weight");
  const CLI::Option* trn_lr =
      c_trn->add_option("--lr", trn.training.lr, "learning rate");
  const CLI::Option* trn_bs =
      c_trn->add_option("--batch-size", trn.training.batch_size, "batch size");
  const CLI::Option* trn_e1 =
      c_trn->add_option("--epochs-step1", trn.training.epochs_step1, "epochs");
  const CLI::Option* trn_e2 =
      c_trn->add_option("--epochs-step2", trn.training.epochs_step2, "epochs");
  const CLI::Option* trn_e3 =
      c_trn->add_option("--epochs-step3", trn.training.epochs_step3, "epochs");
  const CLI::Option* trn_vf = c_trn->add_option(
      "--val-fraction", trn.training.val_fraction, "validation fraction");
  const CLI::Option* trn_hd =
      c_trn->add_option("--hidden-dims", trn.training.hidden_dims,
                        "hidden layer widths")
          ->delimiter(',');
  const CLI::Option* trn_ln =
      c_trn->add_option("--lambda-n", trn.lambda_n, "radial regularization");
  const CLI::Option* trn_ll =
      c_trn->add_option("--lambda-l", trn.lambda_l, "angular regularization");
  const CLI::Option* trn_ze = c_trn->add_option("--zeta", trn.zeta, "scale");
  const CLI::Option* trn_or =
      c_trn->add_option("--order", trn.order, "max radial order (even)");
  const CLI::Option* trn_od = c_trn->add_option(
      "--odf-dirs", trn.odf_dir_count, "ODF direction count for the surrogate");

  CLI::App* c_prd =
      app.add_subcommand("predict", "run the trained network on signals");
  c_prd->add_option("--config", prd.config_path, "JSON config file");
  c_prd->add_option("--model", prd.model_path, "model file")->required();
  c_prd->add_option("--signals", prd.signals_path, "sparse signal volume")
      ->required();
  c_prd->add_option("--out", prd.out_path, "output coefficient volume")
      ->required();

  CLI::App* c_evl = app.add_subcommand(
      "evaluate", "compare coefficient volumes against a gold standard");
  c_evl->add_option("--config", evl.config_path, "JSON config file");
  c_evl->add_option("--gold", evl.gold_path, "gold coefficient volume")
      ->required();
  c_evl->add_option("--pred", evl.pred_specs,
                    "prediction volume as NAME=PATH (repeatable)")
      ->required();
  c_evl->add_option("--truth", evl.truth_path,
                    "ground-truth JSON (anisotropy mask for FO metrics)");
  c_evl->add_option("--report", evl.report_path, "output report JSON")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) {
      const json cfg = load_config(
          sim.config_path, {"seed", "n_train", "n_test", "snr"});
      sim.seed = require_seed(cfg, sim_seed, sim.seed);
      overlay(cfg, "n_train", sim_ntr, sim.n_train);
      overlay(cfg, "n_test", sim_nte, sim.n_test);
      if (sim_snr->count() > 0) {
        json arr = json::array();
        for (const std::string& t : sim_snr_tokens) {
          if (t == "inf") {
            arr.push_back("inf");
            continue;
          }
          try {
            size_t pos = 0;
            const double v = std::stod(t, &pos);
            if (pos != t.size()) throw std::invalid_argument(t);
            arr.push_back(v);
          } catch (const std::exception&) {
            throw UsageError("--snr: expected number or \"inf\", got \"" + t +
                             "\"");
          }
        }
        sim.snr = parse_snr_list(arr);
      } else if (cfg.contains("snr")) {
        sim.snr = parse_snr_list(cfg.at("snr"));
      }
      return cmd_simulate(sim);
    }
    if (c_fit->parsed()) {
      const json cfg = load_config(
          fit.config_path, {"lambda_n", "lambda_l", "zeta", "order"});
      overlay(cfg, "lambda_n", fit_ln, fit.lambda_n);
      overlay(cfg, "lambda_l", fit_ll, fit.lambda_l);
      overlay(cfg, "zeta", fit_ze, fit.zeta);
      overlay(cfg, "order", fit_or, fit.order);
      return cmd_fit(fit);
    }
    if (c_trn->parsed()) {
      const json cfg = load_config(
          trn.config_path,
          {"seed", "ablation_mse_only", "alpha", "lr", "batch_size",
           "epochs_step1", "epochs_step2", "epochs_step3", "val_fraction",
           "hidden_dims", "lambda_n", "lambda_l", "zeta", "order",
           "odf_dir_count"});
      trn.seed = require_seed(cfg, trn_seed, trn.seed);
      if (trn_abl->count() == 0)
        overlay(cfg, "ablation_mse_only", nullptr, trn.ablation_mse_only);
      overlay(cfg, "alpha", trn_al, trn.training.alpha);
      overlay(cfg, "lr", trn_lr, trn.training.lr);
      overlay(cfg, "batch_size", trn_bs, trn.training.batch_size);
      overlay(cfg, "epochs_step1", trn_e1, trn.training.epochs_step1);
      overlay(cfg, "epochs_step2", trn_e2, trn.training.epochs_step2);
      overlay(cfg, "epochs_step3", trn_e3, trn.training.epochs_step3);
      overlay(cfg, "val_fraction", trn_vf, trn.training.val_fraction);
      overlay(cfg, "hidden_dims", trn_hd, trn.training.hidden_dims);
      overlay(cfg, "lambda_n", trn_ln, trn.lambda_n);
      overlay(cfg, "lambda_l", trn_ll, trn.lambda_l);
      overlay(cfg, "zeta", trn_ze, trn.zeta);
      overlay(cfg, "order", trn_or, trn.order);
      overlay(cfg, "odf_dir_count", trn_od, trn.odf_dir_count);
      return cmd_train(trn);
    }
    if (c_prd->parsed()) {
      load_config(prd.config_path, {});  // no predict-specific keys
      return cmd_predict(prd);
    }
    if (c_evl->parsed()) {
      load_config(evl.config_path, {});  // no evaluate-specific keys
      return cmd_evaluate(evl);
    }
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.emplace_back("leape");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const std::string& s : full) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace leape
