// Exercises the shared-library C interface end to end: synthetic data,
// training, model round trip, run/sweep/correlate/hwreport, error paths.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "rnnmemo.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rnnmemo-capi-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string sub(const char* name) const { return (path / name).string(); }
};

// One small trained model + dataset shared by the test cases.
struct Fixture {
  rm_dataset* ds = nullptr;
  rm_model* model = nullptr;
  rm_report* train_report = nullptr;

  Fixture() {
    REQUIRE(rm_dataset_synth(RM_TASK_ADDING, 7, 10, 64, 16, 16, &ds) == RM_OK);
    rm_train_options opt;
    rm_train_options_init(&opt);
    opt.hidden = 8;
    opt.epochs = 8;
    opt.batch_size = 16;
    opt.seed = 3;
    REQUIRE(rm_train(ds, &opt, &model, &train_report) == RM_OK);
  }
  ~Fixture() {
    rm_report_free(train_report);
    rm_model_free(model);
    rm_dataset_free(ds);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("version and status names are stable strings") {
  CHECK(std::string(rm_version()) == "0.1.0");
  CHECK(std::string(rm_status_name(RM_OK)) == "ok");
  CHECK(std::string(rm_status_name(RM_ERR_IO)) == "io_error");
}

TEST_CASE("null arguments are rejected with a message") {
  CHECK(rm_model_load(nullptr, nullptr) == RM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(rm_last_error()).size() > 0);
  rm_dataset* ds = nullptr;
  CHECK(rm_dataset_synth(RM_TASK_ADDING, 1, 10, 0, 0, 0, &ds) == RM_ERR_VALIDATION);
}

TEST_CASE("model save/load round trip preserves inference results") {
  Fixture& f = fixture();
  TempDir dir;
  REQUIRE(rm_model_save(f.model, dir.sub("m").c_str()) == RM_OK);
  rm_model* loaded = nullptr;
  REQUIRE(rm_model_load(dir.sub("m").c_str(), &loaded) == RM_OK);

  rm_hwconfig* hw = nullptr;
  REQUIRE(rm_hwconfig_default(&hw) == RM_OK);
  rm_run_options opt;
  rm_run_options_init(&opt);
  opt.policy = RM_POLICY_BNN;
  opt.theta = 0.2;

  rm_report* a = nullptr;
  rm_report* b = nullptr;
  REQUIRE(rm_run(f.model, f.ds, &opt, hw, &a) == RM_OK);
  REQUIRE(rm_run(loaded, f.ds, &opt, hw, &b) == RM_OK);
  CHECK(rm_report_scalar(a, "results.reuse_fraction") ==
        rm_report_scalar(b, "results.reuse_fraction"));
  CHECK(rm_report_scalar(a, "results.accuracy.value") ==
        rm_report_scalar(b, "results.accuracy.value"));

  rm_report_free(a);
  rm_report_free(b);
  rm_hwconfig_free(hw);
  rm_model_free(loaded);
}

TEST_CASE("run: policy off reports zero reuse; report json parses") {
  Fixture& f = fixture();
  rm_hwconfig* hw = nullptr;
  REQUIRE(rm_hwconfig_default(&hw) == RM_OK);
  rm_run_options opt;
  rm_run_options_init(&opt);

  rm_report* rep = nullptr;
  REQUIRE(rm_run(f.model, f.ds, &opt, hw, &rep) == RM_OK);
  CHECK(rm_report_scalar(rep, "results.reuse_fraction") == 0.0);
  CHECK(rm_report_scalar(rep, "results.hw.speedup") == 1.0);

  char* json = nullptr;
  REQUIRE(rm_report_json(rep, &json) == RM_OK);
  CHECK(std::string(json).find("\"command\": \"run\"") != std::string::npos);
  rm_string_free(json);

  CHECK(std::isnan(rm_report_scalar(rep, "results.not_a_key")));
  rm_report_free(rep);
  rm_hwconfig_free(hw);
}

TEST_CASE("run + hwreport: trace written by run feeds the hw model") {
  Fixture& f = fixture();
  TempDir dir;
  rm_hwconfig* hw = nullptr;
  REQUIRE(rm_hwconfig_default(&hw) == RM_OK);

  rm_run_options opt;
  rm_run_options_init(&opt);
  opt.policy = RM_POLICY_BNN;
  opt.theta = 0.3;
  rm_report* run_rep = nullptr;
  REQUIRE(rm_run(f.model, f.ds, &opt, hw, &run_rep) == RM_OK);
  REQUIRE(rm_report_write(run_rep, dir.sub("out").c_str()) == RM_OK);
  CHECK(fs::exists(dir.path / "out" / "report.json"));
  CHECK(fs::exists(dir.path / "out" / "trace.csv"));

  rm_report* hw_rep = nullptr;
  REQUIRE(rm_hwreport((dir.path / "out" / "trace.csv").string().c_str(), hw, &hw_rep) ==
          RM_OK);
  const double run_speedup = rm_report_scalar(run_rep, "results.hw.speedup");
  const double hw_speedup = rm_report_scalar(hw_rep, "results.hw.speedup");
  CHECK(run_speedup == doctest::Approx(hw_speedup).epsilon(1e-12));

  rm_report_free(hw_rep);
  rm_report_free(run_rep);
  rm_hwconfig_free(hw);
}

TEST_CASE("sweep selects a theta under a permissive loss bound") {
  Fixture& f = fixture();
  rm_sweep_options opt;
  rm_sweep_options_init(&opt);
  const double grid[] = {0.1, 0.3};
  opt.grid = grid;
  opt.grid_len = 2;
  opt.max_loss = 1e9;  // everything feasible
  opt.split = "cal";
  rm_report* rep = nullptr;
  REQUIRE(rm_sweep(f.model, f.ds, &opt, &rep) == RM_OK);
  const double theta = rm_report_scalar(rep, "results.selected.theta");
  CHECK((theta == 0.1 || theta == 0.3));
  rm_report_free(rep);
}

TEST_CASE("correlate returns fractions in range") {
  Fixture& f = fixture();
  rm_report* rep = nullptr;
  REQUIRE(rm_correlate(f.model, f.ds, "test", &rep) == RM_OK);
  const double frac = rm_report_scalar(rep, "results.correlation.fraction_above_0.6");
  CHECK(frac >= 0.0);
  CHECK(frac <= 1.0);
  rm_report_free(rep);
}

TEST_CASE("io errors surface as RM_ERR_IO / validation as RM_ERR_VALIDATION") {
  rm_model* m = nullptr;
  CHECK(rm_model_load("/nonexistent/path/here", &m) == RM_ERR_IO);
  CHECK(std::string(rm_last_error()).find("manifest") != std::string::npos);

  TempDir dir;
  rm_hwconfig* hw = nullptr;
  REQUIRE(rm_hwconfig_default(&hw) == RM_OK);
  rm_report* rep = nullptr;
  CHECK(rm_hwreport(dir.sub("missing.csv").c_str(), hw, &rep) == RM_ERR_IO);
  rm_hwconfig_free(hw);
}

TEST_CASE("dataset save/load round trip through the C surface") {
  Fixture& f = fixture();
  TempDir dir;
  REQUIRE(rm_dataset_save(f.ds, dir.sub("d").c_str()) == RM_OK);
  rm_dataset* back = nullptr;
  REQUIRE(rm_dataset_load(dir.sub("d").c_str(), &back) == RM_OK);
  rm_dataset_free(back);
}
