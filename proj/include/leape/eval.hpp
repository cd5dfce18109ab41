#pragma once

// Feature-level evaluation of propagator reconstructions against ground
// truth: per-sample mean squared displacement, return-to-origin probability,
// and fiber-orientation error, aggregated per method and compared pairwise
// with paired t-tests.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "leape/metrics.hpp"
#include "leape/peaks.hpp"
#include "leape/pipeline.hpp"

namespace leape {

// Ground truth for one voxel/sample.
struct GoldFeatures {
  double msd = 0.0;
  double rtop = 0.0;
  FoSet fo;               // principal axes of the mixture
  bool anisotropic = false;  // false for isotropic samples (FO undefined)
};

// Features extracted from one reconstruction (a coefficient vector).
struct SampleFeatures {
  double msd = 0.0;
  double rtop = 0.0;
  FoSet fo;
};

// Extract MSD / RTOP / FO from one coefficient vector using the shared
// context (tessellation + peak config).
SampleFeatures extract_features(const CoefVector& c, const PipelineContext& ctx);

// Per-sample error series for one method.
struct MethodErrors {
  std::string name;
  std::vector<double> msd_err;   // |m_hat - m_gold| after the metric transform
  std::vector<double> rtop_err;  // same, cube-root domain
  std::vector<double> fo_err;    // degrees; anisotropic samples only
};

// Summary row: mean / sd of each error series.
struct MethodSummary {
  std::string name;
  int n_samples = 0;
  int n_fo_samples = 0;
  double msd_mean = 0.0, msd_sd = 0.0;
  double rtop_mean = 0.0, rtop_sd = 0.0;
  double fo_mean = 0.0, fo_sd = 0.0;
};

// Compute per-sample errors of `coefs` (rows are coefficient vectors, one per
// sample) against gold.  MSD and RTOP are compared through MetricTransform
// (identity for MSD, cube root for RTOP); FO error is computed only where
// gold.anisotropic is true.
MethodErrors method_errors(const std::string& name,
                           const Eigen::MatrixXd& coefs,
                           const std::vector<GoldFeatures>& gold,
                           const PipelineContext& ctx);

MethodSummary summarize(const MethodErrors& e);

struct PairedComparison {
  std::string metric;  // "msd" | "rtop" | "fo"
  std::string method_a, method_b;
  double mean_diff = 0.0;  // mean(err_a - err_b); negative favors method_a
  TTestResult test;
};

// Full evaluation report: one summary per method plus all pairwise paired
// t-tests on the shared error series.
struct EvalReport {
  std::vector<MethodSummary> summaries;
  std::vector<PairedComparison> comparisons;
  int n_samples = 0;
  int n_fo_samples = 0;
};

EvalReport evaluate_methods(const std::vector<MethodErrors>& methods);

// Canonical JSON form of the report (stable key order, no timestamps).
nlohmann::json report_to_json(const EvalReport& report);

// Fixed-width text table for terminal display.
std::string report_to_text(const EvalReport& report);

}  // namespace leape
