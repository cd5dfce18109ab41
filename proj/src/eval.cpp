#include "leape/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "leape/fit.hpp"

namespace leape {

namespace {

double signed_cbrt(double x) { return std::cbrt(x); }

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  if (v.empty()) {
    mean = sd = 0.0;
    return;
  }
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) {
    sd = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

PairedComparison compare_series(const std::string& metric,
                                const MethodErrors& a, const MethodErrors& b,
                                const std::vector<double>& ea,
                                const std::vector<double>& eb) {
  PairedComparison cmp;
  cmp.metric = metric;
  cmp.method_a = a.name;
  cmp.method_b = b.name;
  const Eigen::VectorXd va = to_vec(ea), vb = to_vec(eb);
  cmp.mean_diff = (va - vb).mean();
  try {
    cmp.test = paired_t_test(va, vb);
  } catch (const std::invalid_argument&) {
    // Degenerate series (identical errors or a single pair): no test.
    cmp.test = TTestResult{0.0, 1.0, static_cast<int>(va.size()) - 1};
  }
  return cmp;
}

}  // namespace

SampleFeatures extract_features(const CoefVector& c, const PipelineContext& ctx) {
  SampleFeatures f;
  f.msd = msd(c, ctx.basis);
  f.rtop = rtop(c, ctx.basis);
  f.fo = find_peaks(ctx.ups_tess * c, ctx.peak_tess, ctx.peak_cfg);
  return f;
}

MethodErrors method_errors(const std::string& name,
                           const Eigen::MatrixXd& coefs,
                           const std::vector<GoldFeatures>& gold,
                           const PipelineContext& ctx) {
  if (coefs.rows() != static_cast<Eigen::Index>(gold.size()))
    throw std::invalid_argument("method_errors: row count != gold size");
  if (coefs.cols() != ctx.basis.n_c)
    throw std::invalid_argument("method_errors: column count != n_c");
  MethodErrors out;
  out.name = name;
  out.msd_err.reserve(gold.size());
  out.rtop_err.reserve(gold.size());
  for (size_t i = 0; i < gold.size(); ++i) {
    const CoefVector c = coefs.row(static_cast<Eigen::Index>(i)).transpose();
    const SampleFeatures f = extract_features(c, ctx);
    out.msd_err.push_back(std::abs(f.msd - gold[i].msd));
    out.rtop_err.push_back(
        std::abs(signed_cbrt(f.rtop) - signed_cbrt(gold[i].rtop)));
    if (gold[i].anisotropic)
      out.fo_err.push_back(fo_error(f.fo, gold[i].fo));
  }
  return out;
}

MethodSummary summarize(const MethodErrors& e) {
  MethodSummary s;
  s.name = e.name;
  s.n_samples = static_cast<int>(e.msd_err.size());
  s.n_fo_samples = static_cast<int>(e.fo_err.size());
  mean_sd(e.msd_err, s.msd_mean, s.msd_sd);
  mean_sd(e.rtop_err, s.rtop_mean, s.rtop_sd);
  mean_sd(e.fo_err, s.fo_mean, s.fo_sd);
  return s;
}

EvalReport evaluate_methods(const std::vector<MethodErrors>& methods) {
  if (methods.empty())
    throw std::invalid_argument("evaluate_methods: no methods");
  EvalReport report;
  report.n_samples = static_cast<int>(methods[0].msd_err.size());
  report.n_fo_samples = static_cast<int>(methods[0].fo_err.size());
  for (const MethodErrors& m : methods) {
    if (static_cast<int>(m.msd_err.size()) != report.n_samples ||
        static_cast<int>(m.fo_err.size()) != report.n_fo_samples)
      throw std::invalid_argument(
          "evaluate_methods: methods evaluated on different sample sets");
    report.summaries.push_back(summarize(m));
  }
  for (size_t i = 0; i < methods.size(); ++i) {
    for (size_t j = i + 1; j < methods.size(); ++j) {
      if (report.n_samples >= 2) {
        report.comparisons.push_back(compare_series(
            "msd", methods[i], methods[j], methods[i].msd_err, methods[j].msd_err));
        report.comparisons.push_back(compare_series(
            "rtop", methods[i], methods[j], methods[i].rtop_err,
            methods[j].rtop_err));
      }
      if (report.n_fo_samples >= 2)
        report.comparisons.push_back(compare_series(
            "fo", methods[i], methods[j], methods[i].fo_err, methods[j].fo_err));
    }
  }
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["n_samples"] = report.n_samples;
  j["n_fo_samples"] = report.n_fo_samples;
  j["methods"] = nlohmann::json::array();
  for (const MethodSummary& s : report.summaries) {
    j["methods"].push_back({
        {"name", s.name},
        {"n_samples", s.n_samples},
        {"n_fo_samples", s.n_fo_samples},
        {"msd", {{"mean_abs_err", s.msd_mean}, {"sd", s.msd_sd}}},
        {"rtop_cbrt", {{"mean_abs_err", s.rtop_mean}, {"sd", s.rtop_sd}}},
        {"fo_deg", {{"mean_err", s.fo_mean}, {"sd", s.fo_sd}}},
    });
  }
  j["comparisons"] = nlohmann::json::array();
  for (const PairedComparison& c : report.comparisons) {
    j["comparisons"].push_back({
        {"metric", c.metric},
        {"method_a", c.method_a},
        {"method_b", c.method_b},
        {"mean_diff", c.mean_diff},
        {"t", c.test.t},
        {"p_two_sided", c.test.p},
        {"dof", c.test.dof},
    });
  }
  return j;
}

std::string report_to_text(const EvalReport& report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "samples: %d (anisotropic for FO: %d)\n\n",
                report.n_samples, report.n_fo_samples);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-16s %12s %12s %12s %12s %10s %10s\n",
                "method", "msd_mae", "msd_sd", "rtop3_mae", "rtop3_sd",
                "fo_deg", "fo_sd");
  out += buf;
  for (const MethodSummary& s : report.summaries) {
    std::snprintf(buf, sizeof(buf),
                  "%-16s %12.5g %12.5g %12.5g %12.5g %10.4f %10.4f\n",
                  s.name.c_str(), s.msd_mean, s.msd_sd, s.rtop_mean, s.rtop_sd,
                  s.fo_mean, s.fo_sd);
    out += buf;
  }
  if (!report.comparisons.empty()) {
    out += "\npaired t-tests (err_a - err_b):\n";
    std::snprintf(buf, sizeof(buf), "%-6s %-16s %-16s %12s %10s %12s\n",
                  "metric", "method_a", "method_b", "mean_diff", "t",
                  "p_two_sided");
    out += buf;
    for (const PairedComparison& c : report.comparisons) {
      std::snprintf(buf, sizeof(buf), "%-6s %-16s %-16s %12.5g %10.4f %12.5g\n",
                    c.metric.c_str(), c.method_a.c_str(), c.method_b.c_str(),
                    c.mean_diff, c.test.t, c.test.p);
      out += buf;
    }
  }
  return out;
}

}  // namespace leape
