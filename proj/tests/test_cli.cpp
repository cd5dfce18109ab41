#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "leape/cli.hpp"
#include "leape/io.hpp"

using namespace leape;
using nlohmann::json;
using test_helpers::TempDir;

namespace {

namespace fs = std::filesystem;

// Restore the working directory when a scope ends (the determinism test runs
// the tool from inside two sandboxes with identical relative paths).
class CwdGuard {
 public:
  CwdGuard() : saved_(fs::current_path()) {}
  ~CwdGuard() { fs::current_path(saved_); }

 private:
  fs::path saved_;
};

int cli(const std::vector<std::string>& args) { return run_cli(args); }

// Tiny corpus + full tool chain inside `dir` using relative paths only.
// Returns the evaluation report path.
void run_tiny_pipeline(const std::string& dir) {
  CwdGuard guard;
  fs::create_directories(dir);
  fs::current_path(dir);
  REQUIRE(cli({"simulate", "--out", "corpus", "--seed", "11", "--n-train",
               "24", "--n-test", "6", "--snr", "inf"}) == 0);
  REQUIRE(cli({"fit", "--scheme", "corpus/scheme_dense.txt", "--signals",
               "corpus/test_dense.f32", "--out", "gold.f32"}) == 0);
  REQUIRE(cli({"fit", "--scheme", "corpus/scheme_sparse.txt", "--signals",
               "corpus/test_sparse.f32", "--out", "conv.f32"}) == 0);
  REQUIRE(cli({"train", "--corpus", "corpus/train_dense.f32",
               "--scheme-dense", "corpus/scheme_dense.txt", "--scheme-sparse",
               "corpus/scheme_sparse.txt", "--out", "model.bin", "--seed",
               "5", "--hidden-dims", "16", "--epochs-step1", "2",
               "--epochs-step2", "2", "--epochs-step3", "1", "--batch-size",
               "8", "--odf-dirs", "12"}) == 0);
  REQUIRE(cli({"predict", "--model", "model.bin", "--signals",
               "corpus/test_sparse.f32", "--out", "pred.f32"}) == 0);
  REQUIRE(cli({"evaluate", "--gold", "gold.f32", "--pred", "conv=conv.f32",
               "--pred", "leape=pred.f32", "--truth",
               "corpus/truth_test.json", "--report", "report.json"}) == 0);
}

}  // namespace

TEST_CASE("cli: usage errors exit with code 2") {
  TempDir dir("cli-usage");
  CHECK(cli({}) == 2);                              // no subcommand
  CHECK(cli({"simulate", "--bogus", "1"}) == 2);    // unknown flag
  CHECK(cli({"fit", "--scheme", "s.txt"}) == 2);    // missing required flags
  CHECK(cli({"simulate", "--out", dir.str("c")}) == 2);  // seed required
  CHECK(cli({"simulate", "--out", dir.str("c"), "--seed", "1", "--snr",
             "fast"}) == 2);                        // bad snr token
  CHECK(cli({"simulate", "--out", dir.str("c"), "--seed", "1", "--n-train",
             "0"}) == 2);                           // empty corpus
  CHECK(cli({"evaluate", "--gold", dir.str("g.f32"), "--pred", "noequals",
             "--report", dir.str("r.json")}) == 2);
  CHECK(cli({"evaluate", "--gold", dir.str("g.f32"), "--pred", "a=x.f32",
             "--pred", "a=y.f32", "--report", dir.str("r.json")}) == 2);

  // Config with an unknown key is a usage error, not a data error.
  write_json(dir.str("bad.json"), json{{"bogus", 1}});
  CHECK(cli({"fit", "--config", dir.str("bad.json"), "--scheme",
             dir.str("s.txt"), "--signals", dir.str("y.f32"), "--out",
             dir.str("c.f32")}) == 2);
  // Odd basis order is rejected before any file access.
  CHECK(cli({"fit", "--scheme", dir.str("s.txt"), "--signals",
             dir.str("y.f32"), "--out", dir.str("c.f32"), "--order", "3"}) ==
        2);
  // Train without a seed (flag or config).
  CHECK(cli({"train", "--corpus", dir.str("t.f32"), "--scheme-dense",
             dir.str("d.txt"), "--scheme-sparse", dir.str("s.txt"), "--out",
             dir.str("m.bin")}) == 2);
}

TEST_CASE("cli: data errors exit with code 3") {
  TempDir dir("cli-data");
  // Missing input files.
  CHECK(cli({"fit", "--scheme", dir.str("missing.txt"), "--signals",
             dir.str("missing.f32"), "--out", dir.str("c.f32")}) == 3);
  CHECK(cli({"predict", "--model", dir.str("missing.bin"), "--signals",
             dir.str("missing.f32"), "--out", dir.str("c.f32")}) == 3);
  CHECK(cli({"evaluate", "--gold", dir.str("missing.f32"), "--pred",
             "a=" + dir.str("x.f32"), "--report", dir.str("r.json")}) == 3);
}

TEST_CASE("cli: full tool chain on a tiny corpus") {
  TempDir dir("cli-e2e");
  run_tiny_pipeline(dir.str());

  // Corpus artifacts.
  const json manifest = read_json(dir.str("corpus/corpus.json"));
  CHECK(manifest.at("n_train") == 24);
  CHECK(manifest.at("n_test") == 6);
  CHECK(manifest.at("schemes").at("sparse").at("n_samples") == 61);
  CHECK(manifest.at("schemes").at("dense").at("fnv1a64").get<std::string>().size() ==
        16);
  CHECK(manifest.at("snr")[0] == "inf");
  const json truth = read_json(dir.str("corpus/truth_test.json"));
  CHECK(truth.at("n_samples") == 6);
  CHECK(truth.at("samples").size() == 6);

  // Model container + its training log.
  const std::string model = read_file(dir.str("model.bin"));
  CHECK(model.substr(0, 8) == "LEAPEMDL");
  const json log = read_json(dir.str("model.bin.log.json"));
  CHECK(log.at("kind") == "leape");
  CHECK(log.at("logs").contains("step1"));
  CHECK(log.at("logs").contains("step3"));

  // Prediction volume carries the basis tag.
  const json pred_sidecar = read_json(dir.str("pred.f32.json"));
  CHECK(pred_sidecar.at("basis").at("N") == 6);
  CHECK(pred_sidecar.at("n_samples") == 6);
  CHECK(pred_sidecar.at("row_length") == 50);

  // Report: two methods, three pairwise comparisons, config echo.
  const json report = read_json(dir.str("report.json"));
  CHECK(report.at("n_samples") == 6);
  REQUIRE(report.at("methods").size() == 2);
  CHECK(report.at("methods")[0].at("name") == "conv");
  CHECK(report.at("methods")[1].at("name") == "leape");
  for (const json& m : report.at("methods")) {
    CHECK(m.at("msd").at("mean_abs_err").get<double>() >= 0.0);
    CHECK(m.at("rtop_cbrt").at("mean_abs_err").get<double>() >= 0.0);
    CHECK(m.at("fo_deg").at("mean_err").get<double>() >= 0.0);
  }
  REQUIRE(report.at("comparisons").size() == 3);
  CHECK(report.at("config").at("truth").at("path") == "corpus/truth_test.json");
  CHECK(fs::exists(dir.str("report.txt")));

  SUBCASE("a prediction identical to gold scores zero everywhere") {
    CwdGuard guard;
    fs::current_path(dir.str());
    REQUIRE(cli({"evaluate", "--gold", "gold.f32", "--pred", "self=gold.f32",
                 "--report", "self.json"}) == 0);
    const json self = read_json(dir.str("self.json"));
    REQUIRE(self.at("methods").size() == 1);
    const json& m = self.at("methods")[0];
    CHECK(m.at("msd").at("mean_abs_err") == 0.0);
    CHECK(m.at("rtop_cbrt").at("mean_abs_err") == 0.0);
    CHECK(m.at("fo_deg").at("mean_err") == 0.0);
    CHECK(self.at("comparisons").empty());
  }

  SUBCASE("prediction on signals from a different scheme is refused") {
    CwdGuard guard;
    fs::current_path(dir.str());
    REQUIRE(cli({"simulate", "--out", "corpus2", "--seed", "999", "--n-train",
                 "2", "--n-test", "2", "--snr", "inf"}) == 0);
    // corpus2's sparse scheme has a different fingerprint than the one the
    // model was trained on.
    CHECK(cli({"predict", "--model", "model.bin", "--signals",
               "corpus2/test_sparse.f32", "--out", "bad.f32"}) == 3);
    // Fitting dense signals against the sparse scheme trips the row check.
    CHECK(cli({"fit", "--scheme", "corpus/scheme_sparse.txt", "--signals",
               "corpus/test_dense.f32", "--out", "bad2.f32"}) == 3);
  }
}

TEST_CASE("cli: identical runs produce byte-identical artifacts") {
  TempDir dir("cli-determinism");
  run_tiny_pipeline(dir.str("run1"));
  run_tiny_pipeline(dir.str("run2"));
  CHECK(read_file(dir.str("run1/model.bin")) ==
        read_file(dir.str("run2/model.bin")));
  CHECK(read_file(dir.str("run1/report.json")) ==
        read_file(dir.str("run2/report.json")));
  CHECK(read_file(dir.str("run1/corpus/train_dense.f32")) ==
        read_file(dir.str("run2/corpus/train_dense.f32")));
  CHECK(read_file(dir.str("run1/corpus/scheme_dense.txt")) ==
        read_file(dir.str("run2/corpus/scheme_dense.txt")));
}
