#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "leape/pipeline.hpp"
#include "leape/rng.hpp"

using namespace leape;
using test_helpers::single_tensor;

namespace {

// Small, fast geometry + data shared by the desk-scale pipeline tests.
struct DeskRig {
  SchemePair pair = make_hcp_like_scheme(5);
  ShoreBasis basis = ShoreBasis::make(6, 700.0);
  PipelineContext ctx = PipelineContext::make(basis, 24);
  FitConfig fit_cfg;

  // n mixtures drawn from the corpus recipe; Rician noise unless snr = inf.
  Eigen::MatrixXd make_dense(int n, std::uint64_t seed,
                             double snr = std::numeric_limits<double>::infinity()) {
    Eigen::MatrixXd dense(n, pair.dense.size());
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd y = simulate_signal(
          sample_mixture(derive_seed(seed, static_cast<std::uint64_t>(i))),
          pair.dense);
      dense.row(i) =
          add_rician_noise(y, snr,
                           derive_seed(seed, 0x10000u + static_cast<std::uint64_t>(i)))
              .transpose();
    }
    return dense;
  }

  std::vector<TrainingSample> make_samples(int n, std::uint64_t seed) {
    return build_training_set(make_dense(n, seed), pair.dense,
                              pair.sparse_indices, ctx, fit_cfg);
  }

  TrainingConfig desk_config() const {
    TrainingConfig cfg;
    cfg.hidden_dims = {48, 48};
    cfg.epochs_step1 = 12;
    cfg.epochs_step2 = 12;
    cfg.epochs_step3 = 6;
    cfg.batch_size = 16;  // small batches: enough optimizer steps at desk scale
    cfg.lr = 0.003;
    cfg.seed = 99;
    return cfg;
  }
};

double params_distance(const MlpParams& a, const MlpParams& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.W.size(); ++i) {
    d += (a.W[i] - b.W[i]).norm();
    d += (a.b[i] - b.b[i]).norm();
  }
  return d;
}

}  // namespace

TEST_CASE("pipeline: train/validation split") {
  const SplitIndices s1 = split_samples(11, 100, 0.1);
  const SplitIndices s2 = split_samples(11, 100, 0.1);
  CHECK(s1.train == s2.train);
  CHECK(s1.val == s2.val);
  CHECK(s1.val.size() == 10);
  CHECK(s1.train.size() == 90);

  // Disjoint cover of 0..n-1.
  std::set<int> all(s1.train.begin(), s1.train.end());
  all.insert(s1.val.begin(), s1.val.end());
  CHECK(all.size() == 100);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 99);

  // Different seeds give different splits; different fractions nest.
  const SplitIndices s3 = split_samples(12, 100, 0.1);
  CHECK(s1.val != s3.val);
  const SplitIndices s4 = split_samples(11, 100, 0.2);
  CHECK(std::equal(s1.val.begin(), s1.val.end(), s4.val.begin()));

  // The validation share is clamped to [1, n-1].
  CHECK(split_samples(1, 5, 0.01).val.size() == 1);
  CHECK(split_samples(1, 2, 0.9).val.size() == 1);
  CHECK_THROWS_AS(split_samples(1, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(split_samples(1, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(split_samples(1, 10, 1.0), std::invalid_argument);
}

TEST_CASE("pipeline: configuration validation") {
  TrainingConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  TrainingConfig bad = cfg;
  bad.alpha = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.lr = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.epochs_step2 = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.val_fraction = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.hidden_dims = {};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.hidden_dims = {16, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("pipeline: training-set assembly") {
  DeskRig rig;

  SUBCASE("sparse inputs are the diffusion-weighted entries in order") {
    // Using the full dense scheme as the "sparse" selection: the input must
    // be exactly the 270 b>0 values of the signal row.
    Eigen::MatrixXd dense(2, rig.pair.dense.size());
    for (int i = 0; i < 2; ++i)
      dense.row(i) = simulate_signal(
                         sample_mixture(derive_seed(7, static_cast<std::uint64_t>(i))),
                         rig.pair.dense)
                         .transpose();
    std::vector<int> all_indices;
    for (int k = 0; k < rig.pair.dense.size(); ++k) all_indices.push_back(k);
    const auto samples = build_training_set(dense, rig.pair.dense, all_indices,
                                            rig.ctx, rig.fit_cfg);
    REQUIRE(samples.size() == 2);
    REQUIRE(samples[0].y_sparse.size() == 270);
    for (int k = 0; k < 270; ++k)
      CHECK(samples[0].y_sparse[k] == dense(0, k));
  }

  SUBCASE("gold features come from the dense fit") {
    const Eigen::Vector3d axis = Eigen::Vector3d(1, 1, 1).normalized();
    Eigen::MatrixXd dense(2, rig.pair.dense.size());
    dense.row(0) =
        simulate_signal(single_tensor(1.7e-3, 0.3e-3, axis), rig.pair.dense)
            .transpose();
    dense.row(1) = simulate_signal(single_tensor(1.4e-3, 0.4e-3,
                                                 Eigen::Vector3d(0, 0, 1)),
                                   rig.pair.dense)
                       .transpose();
    const auto samples = build_training_set(
        dense, rig.pair.dense, rig.pair.sparse_indices, rig.ctx, rig.fit_cfg);

    // c_gold equals an independent fit of the same row.
    const ShoreFitter fitter(rig.pair.dense, rig.basis, rig.fit_cfg);
    const Eigen::VectorXd c0 = fitter.fit(dense.row(0).transpose());
    CHECK((samples[0].c_gold - c0).norm() == 0.0);
    CHECK((samples[0].v_gold - rig.ctx.ups_odf * c0).norm() == 0.0);

    // y_sparse is 60 diffusion-weighted values (the b=0 entry is excluded).
    CHECK(samples[0].y_sparse.size() == 60);

    // The noise-free single-tensor orientation lands within the tessellation
    // resolution of the true axis.  The discrete argmax of a band-limited
    // lobe can sit one vertex away from the nearest vertex, so the bound is
    // a bit above the ~8-degree covering radius of the 162-vertex sphere.
    REQUIRE(samples[0].fo_gold.size() >= 1);
    CHECK(angle_between_lines_deg(samples[0].fo_gold.fos[0], axis) < 12.0);

    CHECK_THROWS_AS(build_training_set(dense, rig.pair.dense, {0, 9999},
                                       rig.ctx, rig.fit_cfg),
                    std::out_of_range);
  }
}

TEST_CASE("pipeline: coefficient regression (step 1)") {
  DeskRig rig;
  const auto samples = rig.make_samples(160, 31);
  const TrainingConfig cfg = rig.desk_config();

  TrainLog log1, log2;
  const MlpParams a = train_step1(samples, cfg, &log1);
  const MlpParams b = train_step1(samples, cfg, &log2);
  CHECK(params_distance(a, b) == 0.0);  // bit-deterministic
  CHECK(log1.val_loss == log2.val_loss);

  REQUIRE(log1.val_loss.size() == static_cast<size_t>(cfg.epochs_step1) + 1);
  REQUIRE(log1.train_loss.size() == static_cast<size_t>(cfg.epochs_step1));
  // The checkpoint is the best validation epoch, never worse than the start.
  const double best = *std::min_element(log1.val_loss.begin(), log1.val_loss.end());
  CHECK(log1.val_loss[static_cast<size_t>(log1.best_epoch)] == best);
  CHECK(best <= log1.val_loss.front());
  // Desk-scale training makes real progress on the training objective.
  CHECK(log1.train_loss.back() < 0.5 * log1.train_loss.front());
}

TEST_CASE("pipeline: orientation-error targets (step 2 input)") {
  DeskRig rig;
  const auto samples = rig.make_samples(24, 77);
  const TrainingConfig cfg = rig.desk_config();
  const MlpParams mlp1 = train_step1(samples, cfg);

  const FoTargets t = build_fo_error_targets(samples, mlp1, rig.ctx);
  const int M = rig.ctx.odf_dirs.size();
  REQUIRE(t.inputs.rows() == 24);
  REQUIRE(t.inputs.cols() == 2 * M);
  REQUIRE(t.targets.size() == 24);
  for (int i = 0; i < 24; ++i) {
    CHECK(t.targets[i] >= 0.0);
    CHECK(t.targets[i] <= 90.0);
    // Right half of the input is the gold ODF.
    CHECK((t.inputs.row(i).tail(M).transpose() - samples[static_cast<size_t>(i)].v_gold)
              .norm() == 0.0);
  }

  // A predictor that is exactly right yields all-zero targets: a one-layer
  // net with W = 0 outputs its bias, and every sample here is identical.
  std::vector<TrainingSample> same(6, samples[0]);
  MlpParams oracle = init_params({60, rig.basis.n_c}, 1);
  oracle.W[0].setZero();
  oracle.b[0] = samples[0].c_gold;
  const FoTargets zero = build_fo_error_targets(same, oracle, rig.ctx);
  CHECK(zero.targets.norm() == 0.0);
  // And its inputs carry v_hat = v_gold in the left half.
  CHECK((zero.inputs.row(0).head(M).transpose() - samples[0].v_gold).norm() <
        1e-12);
}

TEST_CASE("pipeline: error-surrogate regression (step 2)") {
  DeskRig rig;
  const auto samples = rig.make_samples(120, 13);
  const TrainingConfig cfg = rig.desk_config();
  const MlpParams mlp1 = train_step1(samples, cfg);
  const FoTargets targets = build_fo_error_targets(samples, mlp1, rig.ctx);

  TrainLog la, lb;
  const MlpParams m2a = train_step2(targets, cfg, &la);
  const MlpParams m2b = train_step2(targets, cfg, &lb);
  CHECK(params_distance(m2a, m2b) == 0.0);
  CHECK(m2a.input_dim() == 2 * rig.ctx.odf_dirs.size());
  CHECK(m2a.output_dim() == 1);
  REQUIRE(la.val_loss.size() == static_cast<size_t>(cfg.epochs_step2) + 1);
  CHECK(la.val_loss[static_cast<size_t>(la.best_epoch)] <= la.val_loss.front());
}

TEST_CASE("pipeline: composite retraining (step 3)") {
  DeskRig rig;
  const auto samples = rig.make_samples(120, 57);
  const TrainingConfig cfg = rig.desk_config();
  const MlpParams mlp1 = train_step1(samples, cfg);
  const FoTargets targets = build_fo_error_targets(samples, mlp1, rig.ctx);
  const MlpParams mlp2 = train_step2(targets, cfg);
  const MlpParams mlp2_copy = mlp2;

  TrainLog log;
  const MlpParams final1 = train_step3(samples, mlp1, mlp2, rig.ctx, cfg, &log);

  // The error surrogate is read-only during step 3.
  CHECK(params_distance(mlp2, mlp2_copy) == 0.0);
  // Checkpointing: the returned parameters are at least as good on the
  // composite validation objective as the step-1 starting point.
  REQUIRE(log.val_loss.size() == static_cast<size_t>(cfg.epochs_step3) + 1);
  CHECK(log.val_loss[static_cast<size_t>(log.best_epoch)] <=
        log.val_loss.front());
  // Step 3 is deterministic too.
  TrainLog log2;
  const MlpParams again = train_step3(samples, mlp1, mlp2, rig.ctx, cfg, &log2);
  CHECK(params_distance(final1, again) == 0.0);
  CHECK(log.val_loss == log2.val_loss);

  // Dimension guards.
  CHECK_THROWS_AS(train_step3(samples, mlp1, mlp1, rig.ctx, cfg, nullptr),
                  std::invalid_argument);
}

TEST_CASE("pipeline: batch inference equals per-sample inference") {
  DeskRig rig;
  const auto samples = rig.make_samples(12, 3);
  const TrainingConfig cfg = rig.desk_config();
  const MlpParams mlp1 = train_step1(samples, cfg);

  Eigen::MatrixXd X(12, samples[0].y_sparse.size());
  for (int i = 0; i < 12; ++i)
    X.row(i) = samples[static_cast<size_t>(i)].y_sparse.transpose();
  const Eigen::MatrixXd batch = predict(mlp1, X);
  REQUIRE(batch.rows() == 12);
  REQUIRE(batch.cols() == rig.basis.n_c);
  for (int i = 0; i < 12; ++i) {
    const Eigen::MatrixXd one = predict(mlp1, X.row(i));
    CHECK((batch.row(i) - one.row(0)).norm() < 1e-12);
  }
}

TEST_CASE("pipeline: full schedule and compute-matched ablation") {
  DeskRig rig;
  const auto samples = rig.make_samples(140, 21);
  const TrainingConfig cfg = rig.desk_config();

  const TrainOutcome full = train_leape(samples, rig.ctx, cfg, false);
  REQUIRE(full.nets.size() == 2);
  CHECK_FALSE(full.ablation);
  CHECK(full.nets[0].input_dim() == 60);
  CHECK(full.nets[0].output_dim() == rig.basis.n_c);
  CHECK(full.nets[1].input_dim() == 2 * rig.ctx.odf_dirs.size());
  CHECK(full.nets[1].output_dim() == 1);
  CHECK(full.log_step1.train_loss.size() ==
        static_cast<size_t>(cfg.epochs_step1));
  CHECK(full.log_step2.train_loss.size() ==
        static_cast<size_t>(cfg.epochs_step2));
  CHECK(full.log_step3.train_loss.size() ==
        static_cast<size_t>(cfg.epochs_step3));

  const TrainOutcome abl = train_leape(samples, rig.ctx, cfg, true);
  REQUIRE(abl.nets.size() == 1);
  CHECK(abl.ablation);
  // Compute-matched: epochs_step1 + epochs_step3 MSE epochs.
  CHECK(abl.log_step1.train_loss.size() ==
        static_cast<size_t>(cfg.epochs_step1 + cfg.epochs_step3));
  CHECK(abl.log_step2.train_loss.empty());
  CHECK(abl.log_step3.train_loss.empty());

  // The first epochs_step1 epochs of the ablation coincide with step 1 of
  // the full run (same seed-derived shuffles and initialization).
  for (int e = 0; e < cfg.epochs_step1; ++e)
    CHECK(abl.log_step1.train_loss[static_cast<size_t>(e)] ==
          full.log_step1.train_loss[static_cast<size_t>(e)]);
}

TEST_CASE("pipeline: learned estimates beat the sparse conventional fit") {
  // The learned estimator's advantage exists on noisy data, where the
  // conventional subset fit is noise-limited; noise-free, the conventional
  // fit is already near-optimal.  This mirrors the SNR-20 experiment at
  // desk scale.
  DeskRig rig;
  const int n_train = 2000, n_test = 60;
  const double snr = 20.0;
  const auto train_samples =
      build_training_set(rig.make_dense(n_train, 1001, snr), rig.pair.dense,
                         rig.pair.sparse_indices, rig.ctx, rig.fit_cfg);

  TrainingConfig cfg;
  cfg.hidden_dims = {128, 128};
  cfg.epochs_step1 = 60;
  cfg.epochs_step2 = 8;
  cfg.epochs_step3 = 20;
  cfg.batch_size = 32;
  cfg.lr = 0.003;
  cfg.seed = 7;
  const TrainOutcome out = train_leape(train_samples, rig.ctx, cfg, false);

  // Held-out mixtures from the same recipe (different seed stream).
  const Eigen::MatrixXd dense = rig.make_dense(n_test, 0xabcd, snr);
  const auto test_samples = build_training_set(
      dense, rig.pair.dense, rig.pair.sparse_indices, rig.ctx, rig.fit_cfg);

  const ShoreFitter sparse_fitter(rig.pair.sparse, rig.basis, rig.fit_cfg);
  double err_mlp = 0.0, err_conv = 0.0;
  for (int i = 0; i < n_test; ++i) {
    const TrainingSample& s = test_samples[static_cast<size_t>(i)];
    const Eigen::VectorXd chat =
        predict(out.nets[0], s.y_sparse.transpose()).row(0).transpose();
    // The conventional estimator also sees the b=0 sample (61 values).
    Eigen::VectorXd y61(61);
    y61.head(60) = s.y_sparse;
    y61[60] = dense(i, 270);
    const Eigen::VectorXd cconv = sparse_fitter.fit(y61);
    err_mlp += (chat - s.c_gold).squaredNorm();
    err_conv += (cconv - s.c_gold).squaredNorm();
  }
  err_mlp /= n_test;
  err_conv /= n_test;
  CHECK(err_mlp < err_conv);
}
