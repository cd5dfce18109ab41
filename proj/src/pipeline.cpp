#include "leape/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "leape/rng.hpp"

namespace leape {

namespace {

// Seed-derivation tags for the independent random streams of one training
// run.  Per-epoch shuffles use the epoch number directly as the tag, per the
// (seed, epoch) contract; these constants stay clear of small epoch numbers.
constexpr std::uint64_t kTagInitMlp1 = 0x1b001;
constexpr std::uint64_t kTagInitMlp2 = 0x1b002;

std::vector<int> shuffled(std::vector<int> v, Rng& rng) {
  // Fisher-Yates with our own Rng (bit-stable across platforms).
  for (size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[static_cast<size_t>(rng.index(i))]);
  return v;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& M, const std::vector<int>& rows,
                            size_t begin, size_t end) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), M.cols());
  for (size_t i = begin; i < end; ++i)
    out.row(static_cast<Eigen::Index>(i - begin)) = M.row(rows[i]);
  return out;
}

// Generic MSE trainer used by steps 1 and 2 (and the MSE-only ablation).
MlpParams train_mse(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T,
                    const std::vector<int>& hidden_dims, int epochs,
                    const TrainingConfig& cfg, std::uint64_t init_tag,
                    TrainLog* log) {
  const int n = static_cast<int>(X.rows());
  if (n < 2) throw std::invalid_argument("training requires at least 2 samples");

  const SplitIndices split = split_samples(cfg.seed, n, cfg.val_fraction);
  const Eigen::MatrixXd Xval = gather_rows(X, split.val, 0, split.val.size());
  const Eigen::MatrixXd Tval = gather_rows(T, split.val, 0, split.val.size());

  std::vector<int> dims;
  dims.push_back(static_cast<int>(X.cols()));
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(static_cast<int>(T.cols()));

  MlpParams mlp = init_params(dims, derive_seed(cfg.seed, init_tag));
  AdamState adam = AdamState::like(mlp);

  TrainLog local;
  TrainLog& lg = log ? *log : local;
  lg = TrainLog{};
  lg.val_loss.push_back(mse_loss(forward(mlp, Xval), Tval));
  MlpParams best = mlp;
  lg.best_epoch = 0;

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    const std::vector<int> order = shuffled(split.train, shuffle_rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      const Eigen::MatrixXd Xb = gather_rows(X, order, start, stop);
      const Eigen::MatrixXd Tb = gather_rows(T, order, start, stop);
      ForwardCache cache;
      const Eigen::MatrixXd pred = forward(mlp, Xb, &cache);
      Eigen::MatrixXd d_pred;
      epoch_loss += mse_loss(pred, Tb, &d_pred);
      ++batches;
      const MlpGrads grads = backward(mlp, cache, d_pred);
      adam_step(mlp, grads, adam, cfg.lr);
    }
    lg.train_loss.push_back(epoch_loss / std::max(1, batches));
    const double val = mse_loss(forward(mlp, Xval), Tval);
    lg.val_loss.push_back(val);
    if (val < lg.val_loss[static_cast<size_t>(lg.best_epoch)]) {
      lg.best_epoch = epoch;
      best = mlp;
    }
  }
  return best;
}

}  // namespace

void TrainingConfig::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("TrainingConfig: alpha < 0");
  if (!(lr > 0.0)) throw std::invalid_argument("TrainingConfig: lr <= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainingConfig: batch_size < 1");
  if (epochs_step1 < 1 || epochs_step2 < 1 || epochs_step3 < 1)
    throw std::invalid_argument("TrainingConfig: epoch counts must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("TrainingConfig: val_fraction outside (0, 1)");
  if (hidden_dims.empty())
    throw std::invalid_argument("TrainingConfig: no hidden layers");
  for (int d : hidden_dims)
    if (d < 1) throw std::invalid_argument("TrainingConfig: hidden dim < 1");
}

PipelineContext PipelineContext::make(const ShoreBasis& basis, int odf_dir_count) {
  PipelineContext ctx;
  ctx.basis = basis;
  ctx.odf_dirs = fibonacci_directions(odf_dir_count);
  ctx.peak_tess = tessellate_sphere(2);
  ctx.ups_odf = odf_matrix(ctx.odf_dirs, basis);
  ctx.ups_tess = odf_matrix(ctx.peak_tess, basis);
  return ctx;
}

SplitIndices split_samples(std::uint64_t seed, int n, double val_fraction) {
  if (n < 2) throw std::invalid_argument("split_samples: need n >= 2");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("split_samples: val_fraction outside (0, 1)");
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, 0xde0 + static_cast<std::uint64_t>(n)));
  idx = shuffled(std::move(idx), rng);
  int n_val = static_cast<int>(val_fraction * n);
  n_val = std::max(1, std::min(n - 1, n_val));
  SplitIndices out;
  out.val.assign(idx.begin(), idx.begin() + n_val);
  out.train.assign(idx.begin() + n_val, idx.end());
  return out;
}

std::vector<TrainingSample> build_training_set(
    const Eigen::MatrixXd& dense_signals, const GradientScheme& dense_scheme,
    const std::vector<int>& sparse_indices, const PipelineContext& ctx,
    const FitConfig& fit_cfg) {
  if (dense_signals.cols() != dense_scheme.size())
    throw std::invalid_argument(
        "build_training_set: signal row length != dense scheme size");
  dense_scheme.subset(sparse_indices);  // validates index range

  // MLP input: the diffusion-weighted (b > 0) sparse entries only — the b=0
  // sample carries no signal information beyond its role in fitting.
  std::vector<int> dw_in_dense;
  for (int idx : sparse_indices)
    if (dense_scheme.entries[static_cast<size_t>(idx)].b > 0.0)
      dw_in_dense.push_back(idx);

  const ShoreFitter fitter(dense_scheme, ctx.basis, fit_cfg);
  const int n = static_cast<int>(dense_signals.rows());
  std::vector<TrainingSample> samples(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    TrainingSample& s = samples[static_cast<size_t>(i)];
    const Eigen::VectorXd row = dense_signals.row(i).transpose();
    s.c_gold = fitter.fit(row);
    s.v_gold = ctx.ups_odf * s.c_gold;
    s.fo_gold = find_peaks(ctx.ups_tess * s.c_gold, ctx.peak_tess, ctx.peak_cfg);
    s.y_sparse.resize(static_cast<Eigen::Index>(dw_in_dense.size()));
    for (size_t k = 0; k < dw_in_dense.size(); ++k)
      s.y_sparse[static_cast<Eigen::Index>(k)] = row[dw_in_dense[k]];
  }
  return samples;
}

MlpParams train_step1(const std::vector<TrainingSample>& samples,
                      const TrainingConfig& cfg, TrainLog* log) {
  cfg.validate();
  if (samples.size() < 2)
    throw std::invalid_argument("train_step1: need at least 2 samples");
  const Eigen::Index in_dim = samples[0].y_sparse.size();
  const Eigen::Index out_dim = samples[0].c_gold.size();
  Eigen::MatrixXd X(samples.size(), in_dim), T(samples.size(), out_dim);
  for (size_t i = 0; i < samples.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = samples[i].y_sparse.transpose();
    T.row(static_cast<Eigen::Index>(i)) = samples[i].c_gold.transpose();
  }
  return train_mse(X, T, cfg.hidden_dims, cfg.epochs_step1, cfg, kTagInitMlp1, log);
}

FoTargets build_fo_error_targets(const std::vector<TrainingSample>& samples,
                                 const MlpParams& mlp1,
                                 const PipelineContext& ctx) {
  if (samples.empty())
    throw std::invalid_argument("build_fo_error_targets: no samples");
  const int M = ctx.odf_dirs.size();
  FoTargets out;
  out.inputs.resize(static_cast<Eigen::Index>(samples.size()), 2 * M);
  out.targets.resize(static_cast<Eigen::Index>(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) {
    const Eigen::VectorXd chat =
        forward(mlp1, samples[i].y_sparse.transpose()).row(0).transpose();
    const Eigen::VectorXd vhat = ctx.ups_odf * chat;
    const FoSet est =
        find_peaks(ctx.ups_tess * chat, ctx.peak_tess, ctx.peak_cfg);
    out.inputs.row(static_cast<Eigen::Index>(i)).head(M) = vhat.transpose();
    out.inputs.row(static_cast<Eigen::Index>(i)).tail(M) =
        samples[i].v_gold.transpose();
    out.targets[static_cast<Eigen::Index>(i)] = fo_error(est, samples[i].fo_gold);
  }
  return out;
}

MlpParams train_step2(const FoTargets& targets, const TrainingConfig& cfg,
                      TrainLog* log) {
  cfg.validate();
  if (targets.inputs.rows() < 2)
    throw std::invalid_argument("train_step2: need at least 2 targets");
  return train_mse(targets.inputs, targets.targets, cfg.hidden_dims,
                   cfg.epochs_step2, cfg, kTagInitMlp2, log);
}

MlpParams train_step3(const std::vector<TrainingSample>& samples,
                      const MlpParams& mlp1, const MlpParams& mlp2,
                      const PipelineContext& ctx, const TrainingConfig& cfg,
                      TrainLog* log) {
  cfg.validate();
  const int n = static_cast<int>(samples.size());
  if (n < 2) throw std::invalid_argument("train_step3: need at least 2 samples");
  const int M = ctx.odf_dirs.size();
  if (mlp2.input_dim() != 2 * M)
    throw std::invalid_argument("train_step3: mlp2 input dim != 2 * |odf_dirs|");
  if (mlp1.output_dim() != ctx.basis.n_c)
    throw std::invalid_argument("train_step3: mlp1 output dim != n_c");

  Eigen::MatrixXd X(n, samples[0].y_sparse.size());
  Eigen::MatrixXd C(n, samples[0].c_gold.size());
  Eigen::MatrixXd Vgold(n, M);
  for (int i = 0; i < n; ++i) {
    X.row(i) = samples[static_cast<size_t>(i)].y_sparse.transpose();
    C.row(i) = samples[static_cast<size_t>(i)].c_gold.transpose();
    Vgold.row(i) = samples[static_cast<size_t>(i)].v_gold.transpose();
  }

  const SplitIndices split = split_samples(cfg.seed, n, cfg.val_fraction);
  const Eigen::MatrixXd Xval = gather_rows(X, split.val, 0, split.val.size());
  const Eigen::MatrixXd Cval = gather_rows(C, split.val, 0, split.val.size());
  const Eigen::MatrixXd Vval = gather_rows(Vgold, split.val, 0, split.val.size());

  // Composite objective (sum over the given set), stated per sample as
  // alpha ||chat - c||^2 + mlp2([Ups chat; v_gold]).
  auto composite_on = [&](const MlpParams& net, const Eigen::MatrixXd& Xs,
                          const Eigen::MatrixXd& Cs, const Eigen::MatrixXd& Vs) {
    const Eigen::MatrixXd chat = forward(net, Xs);
    Eigen::MatrixXd x2(Xs.rows(), 2 * M);
    x2.leftCols(M) = chat * ctx.ups_odf.transpose();
    x2.rightCols(M) = Vs;
    const Eigen::VectorXd ehat = forward(mlp2, x2).col(0);
    return composite_loss(chat, Cs, ehat, cfg.alpha);
  };

  MlpParams mlp = mlp1;  // continue from the step-1 parameters
  AdamState adam = AdamState::like(mlp);

  TrainLog local;
  TrainLog& lg = log ? *log : local;
  lg = TrainLog{};
  lg.val_loss.push_back(composite_on(mlp, Xval, Cval, Vval));
  MlpParams best = mlp;
  lg.best_epoch = 0;

  for (int epoch = 1; epoch <= cfg.epochs_step3; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    const std::vector<int> order = shuffled(split.train, shuffle_rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      const Eigen::MatrixXd Xb = gather_rows(X, order, start, stop);
      const Eigen::MatrixXd Cb = gather_rows(C, order, start, stop);
      const Eigen::MatrixXd Vb = gather_rows(Vgold, order, start, stop);

      ForwardCache cache1;
      const Eigen::MatrixXd chat = forward(mlp, Xb, &cache1);
      Eigen::MatrixXd x2(Xb.rows(), 2 * M);
      x2.leftCols(M) = chat * ctx.ups_odf.transpose();
      x2.rightCols(M) = Vb;
      ForwardCache cache2;
      const Eigen::MatrixXd ehat = forward(mlp2, x2, &cache2);

      Eigen::MatrixXd d_chat;
      Eigen::VectorXd d_ehat;
      epoch_loss += composite_loss(chat, Cb, ehat.col(0), cfg.alpha, &d_chat, &d_ehat);
      ++batches;

      // Surrogate branch: d(ehat)/d(chat) via MLP2 input gradients, v-hat
      // block only, chained through the fixed ODF matrix.
      Eigen::MatrixXd d_x2;
      backward(mlp2, cache2, d_ehat, &d_x2);  // MLP2 grads discarded (frozen)
      d_chat += d_x2.leftCols(M) * ctx.ups_odf;

      const MlpGrads grads = backward(mlp, cache1, d_chat);
      adam_step(mlp, grads, adam, cfg.lr);
    }
    lg.train_loss.push_back(epoch_loss / std::max(1, batches));
    const double val = composite_on(mlp, Xval, Cval, Vval);
    lg.val_loss.push_back(val);
    if (val < lg.val_loss[static_cast<size_t>(lg.best_epoch)]) {
      lg.best_epoch = epoch;
      best = mlp;
    }
  }
  return best;
}

Eigen::MatrixXd predict(const MlpParams& mlp1, const Eigen::MatrixXd& y_sparse) {
  return forward(mlp1, y_sparse);
}

TrainOutcome train_leape(const std::vector<TrainingSample>& samples,
                         const PipelineContext& ctx, const TrainingConfig& cfg,
                         bool ablation_mse_only) {
  cfg.validate();
  TrainOutcome out;
  out.ablation = ablation_mse_only;
  if (ablation_mse_only) {
    // Compute-matched MSE-only baseline: the same MLP1 trained with plain MSE
    // for as many epochs as the full schedule spends on MLP1.
    TrainingConfig abl = cfg;
    abl.epochs_step1 = cfg.epochs_step1 + cfg.epochs_step3;
    out.nets.push_back(train_step1(samples, abl, &out.log_step1));
    return out;
  }
  MlpParams mlp1 = train_step1(samples, cfg, &out.log_step1);
  const FoTargets targets = build_fo_error_targets(samples, mlp1, ctx);
  MlpParams mlp2 = train_step2(targets, cfg, &out.log_step2);
  MlpParams mlp1_final =
      train_step3(samples, mlp1, mlp2, ctx, cfg, &out.log_step3);
  out.nets.push_back(std::move(mlp1_final));
  out.nets.push_back(std::move(mlp2));
  return out;
}

}  // namespace leape
