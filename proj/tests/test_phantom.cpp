#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <doctest.h>

#include "helpers.hpp"
#include "leape/phantom.hpp"
#include "leape/rng.hpp"

using namespace leape;
using test_helpers::single_tensor;

namespace {
const double kPi = 3.14159265358979323846;
const double kTau = 1.0 / (4.0 * kPi * kPi);
const double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("phantom: multi-shell scheme layout") {
  const SchemePair pair = make_hcp_like_scheme(7);
  REQUIRE(pair.dense.size() == 271);
  REQUIRE(pair.sparse.size() == 61);
  REQUIRE(pair.sparse_indices.size() == 61);

  // Dense: 90 x b=1000, 90 x b=2000, 90 x b=3000, then one b=0.
  for (int k = 0; k < 270; ++k) {
    const SchemeEntry& e = pair.dense.entries[static_cast<size_t>(k)];
    CHECK(e.b == 1000.0 * (1 + k / 90));
    CHECK(std::abs(e.dir.norm() - 1.0) < 1e-12);
  }
  CHECK(pair.dense.entries[270].b == 0.0);
  CHECK(pair.dense.entries[270].dir.norm() == 0.0);

  // Sparse = first 30 of each of the two inner shells + the b=0 sample.
  for (int i = 0; i < 30; ++i) CHECK(pair.sparse_indices[static_cast<size_t>(i)] == i);
  for (int i = 0; i < 30; ++i)
    CHECK(pair.sparse_indices[static_cast<size_t>(30 + i)] == 90 + i);
  CHECK(pair.sparse_indices[60] == 270);
  for (int i = 0; i < 61; ++i) {
    const SchemeEntry& s = pair.sparse.entries[static_cast<size_t>(i)];
    const SchemeEntry& d =
        pair.dense.entries[static_cast<size_t>(pair.sparse_indices[static_cast<size_t>(i)])];
    CHECK(s.b == d.b);
    CHECK((s.dir - d.dir).norm() == 0.0);
  }
}

TEST_CASE("phantom: shell directions are well separated and deterministic") {
  const SchemePair a = make_hcp_like_scheme(7);
  const SchemePair b = make_hcp_like_scheme(7);
  const SchemePair c = make_hcp_like_scheme(8);
  double cross_seed_diff = 0.0;
  for (int k = 0; k < 271; ++k) {
    CHECK((a.dense.entries[static_cast<size_t>(k)].dir -
           b.dense.entries[static_cast<size_t>(k)].dir).norm() == 0.0);
    cross_seed_diff += (a.dense.entries[static_cast<size_t>(k)].dir -
                        c.dense.entries[static_cast<size_t>(k)].dir).norm();
  }
  CHECK(cross_seed_diff > 1.0);

  for (int shell = 0; shell < 3; ++shell) {
    double min_angle = 180.0;
    for (int i = 0; i < 90; ++i)
      for (int j = i + 1; j < 90; ++j)
        min_angle = std::min(
            min_angle,
            angle_between_lines_deg(
                a.dense.entries[static_cast<size_t>(90 * shell + i)].dir,
                a.dense.entries[static_cast<size_t>(90 * shell + j)].dir));
    // 90 antipodal lines optimized by repulsion: no two closer than 10 deg.
    CHECK(min_angle > 10.0);
  }
}

TEST_CASE("phantom: multi-tensor signal model") {
  const SchemePair pair = make_hcp_like_scheme(3);

  SUBCASE("the b=0 sample is exactly 1") {
    const Eigen::VectorXd y =
        simulate_signal(single_tensor(1.7e-3, 0.3e-3, Eigen::Vector3d(0, 0, 1)),
                        pair.dense);
    CHECK(y[270] == 1.0);
    CHECK(y.minCoeff() > 0.0);
    CHECK(y.maxCoeff() <= 1.0);
  }

  SUBCASE("an isotropic compartment depends only on b") {
    const double d = 0.8e-3;
    TensorMixture iso;
    iso.compartments.push_back(
        {1.0, Eigen::Vector3d(d, d, d), Eigen::Vector3d(0, 0, 1)});
    const Eigen::VectorXd y = simulate_signal(iso, pair.dense);
    for (int shell = 0; shell < 3; ++shell) {
      const double expect = std::exp(-1000.0 * (shell + 1) * d);
      for (int i = 0; i < 90; ++i)
        CHECK(y[90 * shell + i] == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  SUBCASE("attenuation along the principal axis") {
    GradientScheme s;
    s.entries.push_back({Eigen::Vector3d(0, 0, 1), 1000.0});
    s.entries.push_back({Eigen::Vector3d(1, 0, 0), 1000.0});
    const Eigen::VectorXd y =
        simulate_signal(single_tensor(1.7e-3, 0.3e-3, Eigen::Vector3d(0, 0, 1)), s);
    CHECK(y[0] == doctest::Approx(std::exp(-1.7)).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));
  }

  SUBCASE("the mixture signal is linear in the fractions") {
    const TensorMixture m1 = single_tensor(1.5e-3, 0.3e-3, Eigen::Vector3d(1, 0, 0));
    const TensorMixture m2 = single_tensor(1.9e-3, 0.4e-3, Eigen::Vector3d(0, 1, 0));
    TensorMixture mix;
    mix.compartments = {m1.compartments[0], m2.compartments[0]};
    mix.compartments[0].fraction = 0.3;
    mix.compartments[1].fraction = 0.7;
    const Eigen::VectorXd y = simulate_signal(mix, pair.dense);
    const Eigen::VectorXd y1 = simulate_signal(m1, pair.dense);
    const Eigen::VectorXd y2 = simulate_signal(m2, pair.dense);
    CHECK((y - (0.3 * y1 + 0.7 * y2)).norm() < 1e-14);
  }

  SUBCASE("invalid mixtures are rejected") {
    TensorMixture bad;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // empty
    bad.compartments.push_back(
        {0.6, Eigen::Vector3d(1e-3, 1e-3, 1e-3), Eigen::Vector3d(0, 0, 1)});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // sum != 1
    bad.compartments[0].fraction = 1.0;
    bad.compartments[0].lambdas[2] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // eigenvalue <= 0
    bad.compartments[0].lambdas[2] = 1e-3;
    bad.compartments[0].axis = Eigen::Vector3d(1, 1, 0);  // |axis| != 1
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.compartments[0].axis = Eigen::Vector3d(0, 1, 0);
    CHECK_NOTHROW(bad.validate());
  }
}

TEST_CASE("phantom: Rician noise") {
  const SchemePair pair = make_hcp_like_scheme(3);
  const Eigen::VectorXd y = simulate_signal(
      single_tensor(1.7e-3, 0.3e-3, Eigen::Vector3d(0, 0, 1)), pair.dense);

  SUBCASE("infinite SNR is the identity") {
    const Eigen::VectorXd out = add_rician_noise(y, kInf, 1);
    CHECK((out - y).norm() == 0.0);
  }

  SUBCASE("deterministic in the seed") {
    const Eigen::VectorXd n1 = add_rician_noise(y, 20.0, 77);
    const Eigen::VectorXd n2 = add_rician_noise(y, 20.0, 77);
    const Eigen::VectorXd n3 = add_rician_noise(y, 20.0, 78);
    CHECK((n1 - n2).norm() == 0.0);
    CHECK((n1 - n3).norm() > 0.0);
    CHECK(n1.minCoeff() > 0.0);  // magnitude signal stays positive
  }

  SUBCASE("second moment matches the Rician identity") {
    // E[y'^2] = y^2 + 2 sigma^2; estimate over 100k independent entries.
    const int n = 100000;
    const double value = 0.8, snr = 20.0, sigma = 1.0 / snr;
    const Eigen::VectorXd base = Eigen::VectorXd::Constant(n, value);
    const Eigen::VectorXd noisy = add_rician_noise(base, snr, 2024);
    const double mean_sq = noisy.array().square().mean();
    const double expect = value * value + 2.0 * sigma * sigma;
    // Var(y'^2) = 4 sigma^2 y^2 + 4 sigma^4; allow four standard errors.
    const double se = std::sqrt((4 * sigma * sigma * value * value +
                                 4 * std::pow(sigma, 4.0)) / n);
    CHECK(std::abs(mean_sq - expect) < 4.0 * se);
  }

  SUBCASE("non-positive SNR is rejected") {
    CHECK_THROWS_AS(add_rician_noise(y, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(add_rician_noise(y, -3.0, 1), std::invalid_argument);
  }
}

TEST_CASE("phantom: analytic ground-truth features") {
  SUBCASE("isotropic compartment") {
    const double d = 0.9e-3;
    TensorMixture iso;
    iso.compartments.push_back(
        {1.0, Eigen::Vector3d(d, d, d), Eigen::Vector3d(0, 0, 1)});
    const GroundTruthFeatures gt = ground_truth_features(iso);
    CHECK(gt.msd == doctest::Approx(6.0 * kTau * d).epsilon(1e-14));
    CHECK(gt.rtop ==
          doctest::Approx(std::pow(4.0 * kPi * kTau * d, -1.5)).epsilon(1e-12));
  }

  SUBCASE("features are fraction-weighted sums") {
    const TensorMixture m1 = single_tensor(1.7e-3, 0.3e-3, Eigen::Vector3d(1, 0, 0));
    const TensorMixture m2 = single_tensor(1.3e-3, 0.45e-3, Eigen::Vector3d(0, 0, 1));
    TensorMixture mix;
    mix.compartments = {m1.compartments[0], m2.compartments[0]};
    mix.compartments[0].fraction = 0.5;
    mix.compartments[1].fraction = 0.5;
    const GroundTruthFeatures g1 = ground_truth_features(m1);
    const GroundTruthFeatures g2 = ground_truth_features(m2);
    const GroundTruthFeatures g = ground_truth_features(mix);
    CHECK(g.msd == doctest::Approx(0.5 * (g1.msd + g2.msd)).epsilon(1e-14));
    CHECK(g.rtop == doctest::Approx(0.5 * (g1.rtop + g2.rtop)).epsilon(1e-14));
    REQUIRE(g.fos.size() == 2);
  }

  SUBCASE("orientations are canonicalized principal axes") {
    const Eigen::Vector3d down = Eigen::Vector3d(0.2, 0.3, -0.9).normalized();
    const GroundTruthFeatures gt =
        ground_truth_features(single_tensor(1.7e-3, 0.3e-3, down));
    REQUIRE(gt.fos.size() == 1);
    CHECK(gt.fos.fos[0].isApprox(-down, 1e-12));  // flipped to z >= 0
  }

  SUBCASE("minor compartments carry no orientation") {
    TensorMixture mix;
    mix.compartments.push_back(
        {0.85, Eigen::Vector3d(1.7e-3, 0.3e-3, 0.3e-3), Eigen::Vector3d(1, 0, 0)});
    mix.compartments.push_back(
        {0.15, Eigen::Vector3d(1.7e-3, 0.3e-3, 0.3e-3), Eigen::Vector3d(0, 0, 1)});
    const GroundTruthFeatures gt = ground_truth_features(mix);
    REQUIRE(gt.fos.size() == 1);
    CHECK(angle_between_lines_deg(gt.fos.fos[0], Eigen::Vector3d(1, 0, 0)) <
          1e-9);
  }
}

TEST_CASE("phantom: corpus sampling recipe invariants") {
  std::set<int> seen_counts;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const TensorMixture mix = sample_mixture(seed);
    const int n = static_cast<int>(mix.compartments.size());
    REQUIRE(n >= 1);
    REQUIRE(n <= 3);
    seen_counts.insert(n);
    CHECK_NOTHROW(mix.validate());
    double total = 0.0;
    for (const TensorCompartment& c : mix.compartments) {
      CHECK(c.fraction >= 0.2);
      total += c.fraction;
      CHECK(c.lambdas[0] >= 1.2e-3);
      CHECK(c.lambdas[0] <= 2.0e-3);
      CHECK(c.lambdas[1] >= 0.2e-3);
      CHECK(c.lambdas[1] <= 0.5e-3);
      CHECK(c.lambdas[1] == c.lambdas[2]);
      CHECK(std::abs(c.axis.norm() - 1.0) < 1e-12);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t i = 0; i < mix.compartments.size(); ++i)
      for (size_t j = i + 1; j < mix.compartments.size(); ++j)
        CHECK(angle_between_lines_deg(mix.compartments[i].axis,
                                      mix.compartments[j].axis) >= 30.0);
    // Same seed reproduces the same mixture.
    const TensorMixture again = sample_mixture(seed);
    REQUIRE(again.compartments.size() == mix.compartments.size());
    for (size_t i = 0; i < mix.compartments.size(); ++i) {
      CHECK(again.compartments[i].fraction == mix.compartments[i].fraction);
      CHECK((again.compartments[i].axis - mix.compartments[i].axis).norm() ==
            0.0);
    }
  }
  CHECK(seen_counts.size() == 3);  // all of 1, 2, 3 compartments occur
}
