#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "leape/fit.hpp"
#include "leape/mlp.hpp"
#include "leape/peaks.hpp"
#include "leape/phantom.hpp"

// The two-MLP learning pipeline:
//
//   step 1  train MLP1 (sparse signals -> coefficients) on MSE vs the
//           dense-scheme gold-standard coefficients;
//   step 2  train MLP2 ([estimated ODF; gold ODF] -> FO error in degrees)
//           on targets computed with the step-1 MLP1;
//   step 3  freeze MLP2 and retrain MLP1 on the composite objective
//           sum_i [ alpha ||chat - c_gold||^2 + MLP2([Ups chat; v_gold]) ],
//           back-propagating through the fixed ODF matrix and frozen MLP2
//           into MLP1 only.
//
// At test time only MLP1 runs: chat = MLP1(y_sparse).

namespace leape {

struct TrainingConfig {
  double alpha = 0.5;
  double lr = 0.001;
  int batch_size = 128;
  int epochs_step1 = 10;
  int epochs_step2 = 40;
  int epochs_step3 = 10;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
  // Hidden layer widths of both MLPs (three 500-unit layers by default).
  std::vector<int> hidden_dims = {500, 500, 500};

  void validate() const;
};

struct TrainingSample {
  Eigen::VectorXd y_sparse;  // diffusion-weighted (b > 0) entries on scheme G
  Eigen::VectorXd c_gold;    // dense-scheme fit
  Eigen::VectorXd v_gold;    // ODF of c_gold on the ODF direction set
  FoSet fo_gold;             // peaks of c_gold on the peak tessellation
};

// Shared immutable geometry: basis, ODF direction set (MLP2 input domain),
// peak tessellation, and their ODF matrices.  Built once; the matrices are
// reused bitwise-identically by every training step and by inference.
struct PipelineContext {
  ShoreBasis basis;
  DirectionSet odf_dirs;    // spherical Fibonacci hemisphere (100 by default)
  DirectionSet peak_tess;   // icosphere, subdivisions = 2
  Eigen::MatrixXd ups_odf;  // |odf_dirs| x n_c
  Eigen::MatrixXd ups_tess; // |peak_tess| x n_c
  PeakConfig peak_cfg;

  static PipelineContext make(const ShoreBasis& basis, int odf_dir_count = 100);
};

// Deterministic train/validation split: a function of (seed, n) only.
struct SplitIndices {
  std::vector<int> train;
  std::vector<int> val;
};
SplitIndices split_samples(std::uint64_t seed, int n, double val_fraction);

// Assemble training samples from dense-scheme signals (one row per sample).
// sparse_indices select scheme G out of the dense scheme by index.
std::vector<TrainingSample> build_training_set(
    const Eigen::MatrixXd& dense_signals, const GradientScheme& dense_scheme,
    const std::vector<int>& sparse_indices, const PipelineContext& ctx,
    const FitConfig& fit_cfg);

// Per-epoch validation trace of one training step.  val_loss[0] is the loss
// at the step's starting parameters (epoch 0); the returned parameters are
// the checkpoint with the smallest validation loss, so
// min(val_loss) = val_loss[best_epoch] <= val_loss[0].
struct TrainLog {
  std::vector<double> train_loss;  // per epoch (1-based; mean over batches)
  std::vector<double> val_loss;    // epoch 0 = at start, then per epoch
  int best_epoch = 0;
};

MlpParams train_step1(const std::vector<TrainingSample>& samples,
                      const TrainingConfig& cfg, TrainLog* log = nullptr);

// FO-error regression set: inputs [v_hat; v_gold] (estimated first),
// targets fo_error(peaks(ups_tess * chat), fo_gold) in degrees.
struct FoTargets {
  Eigen::MatrixXd inputs;   // n x (2 * |odf_dirs|)
  Eigen::VectorXd targets;  // n, in [0, 90]
};
FoTargets build_fo_error_targets(const std::vector<TrainingSample>& samples,
                                 const MlpParams& mlp1,
                                 const PipelineContext& ctx);

MlpParams train_step2(const FoTargets& targets, const TrainingConfig& cfg,
                      TrainLog* log = nullptr);

// Step 3: returns the retrained MLP1; mlp2 is read-only (bit-identical after).
MlpParams train_step3(const std::vector<TrainingSample>& samples,
                      const MlpParams& mlp1, const MlpParams& mlp2,
                      const PipelineContext& ctx, const TrainingConfig& cfg,
                      TrainLog* log = nullptr);

// Inference: chat = MLP1(y_sparse); one row per sample.
Eigen::MatrixXd predict(const MlpParams& mlp1, const Eigen::MatrixXd& y_sparse);

struct TrainOutcome {
  std::vector<MlpParams> nets;  // {mlp1, mlp2} or {mlp1} (MSE-only ablation)
  TrainLog log_step1, log_step2, log_step3;
  bool ablation = false;
};

// Run the full three-step schedule, or — with ablation_mse_only — the
// MSE-only baseline trained for epochs_step1 + epochs_step3 epochs
// (compute-matched to the full schedule's MLP1 training).
TrainOutcome train_leape(const std::vector<TrainingSample>& samples,
                         const PipelineContext& ctx, const TrainingConfig& cfg,
                         bool ablation_mse_only);

}  // namespace leape
