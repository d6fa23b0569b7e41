// rnnmemo command line tool. Thin orchestration over the C API; all real
// work happens inside librnnmemo.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rnnmemo.h"

namespace {

struct ReportDeleter {
  void operator()(rm_report* r) const { rm_report_free(r); }
};
struct ModelDeleter {
  void operator()(rm_model* m) const { rm_model_free(m); }
};
struct DatasetDeleter {
  void operator()(rm_dataset* d) const { rm_dataset_free(d); }
};
struct HwDeleter {
  void operator()(rm_hwconfig* h) const { rm_hwconfig_free(h); }
};

using ReportPtr = std::unique_ptr<rm_report, ReportDeleter>;
using ModelPtr = std::unique_ptr<rm_model, ModelDeleter>;
using DatasetPtr = std::unique_ptr<rm_dataset, DatasetDeleter>;
using HwPtr = std::unique_ptr<rm_hwconfig, HwDeleter>;

[[noreturn]] void fail(rm_status s) {
  std::fprintf(stderr, "error (%s): %s\n", rm_status_name(s), rm_last_error());
  std::exit(s == RM_OK ? 1 : static_cast<int>(s));
}

void check(rm_status s) {
  if (s != RM_OK) fail(s);
}

// Shared --data / --task source flags.
struct DataFlags {
  std::string data_dir;
  std::string task = "adding";
  std::uint64_t task_seed = 1;
  std::size_t steps = 30;
  std::size_t train_seqs = 0;
  std::size_t cal_seqs = 0;
  std::size_t test_seqs = 32;

  void attach(CLI::App* app, bool for_training) {
    app->add_option("--data", data_dir, "dataset directory (manifest.json + blobs)");
    app->add_option("--task", task, "synthetic task: adding | classify")
        ->check(CLI::IsMember({"adding", "classify"}));
    app->add_option("--task-seed", task_seed, "seed for synthetic data");
    app->add_option("--steps", steps, "timesteps per synthetic sequence");
    if (for_training) {
      if (train_seqs == 0) train_seqs = 1024;
      if (cal_seqs == 0) cal_seqs = 64;
      if (test_seqs == 0) test_seqs = 128;
    }
    app->add_option("--train-seqs", train_seqs, "synthetic train sequences");
    app->add_option("--cal-seqs", cal_seqs, "synthetic calibration sequences");
    app->add_option("--test-seqs", test_seqs, "synthetic test sequences");
  }

  DatasetPtr open() const {
    rm_dataset* ds = nullptr;
    if (!data_dir.empty()) {
      check(rm_dataset_load(data_dir.c_str(), &ds));
    } else {
      const rm_task_kind kind = task == "adding" ? RM_TASK_ADDING : RM_TASK_CLASSIFY;
      check(rm_dataset_synth(kind, task_seed, steps, train_seqs, cal_seqs, test_seqs, &ds));
    }
    return DatasetPtr(ds);
  }
};

HwPtr open_hw(const std::string& path) {
  rm_hwconfig* hw = nullptr;
  if (path.empty()) {
    check(rm_hwconfig_default(&hw));
  } else {
    check(rm_hwconfig_load(path.c_str(), &hw));
  }
  return HwPtr(hw);
}

ModelPtr open_model(const std::string& path) {
  rm_model* m = nullptr;
  check(rm_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

void write_report(const rm_report* rep, const std::string& out_dir) {
  check(rm_report_write(rep, out_dir.c_str()));
  std::printf("wrote %s/report.json\n", out_dir.c_str());
}

void print_scalar(const rm_report* rep, const char* label, const char* path) {
  const double v = rm_report_scalar(rep, path);
  if (v == v) std::printf("%s: %g\n", label, v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuron-level fuzzy memoization for RNN inference"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rm_version()));

  // ---- run ----
  auto* run = app.add_subcommand("run", "run inference under a memoization policy");
  std::string run_model, run_out, run_hw_path, run_policy = "off", run_split = "test";
  std::string run_trace_format = "csv";
  double run_theta = 0.0;
  bool run_no_throttle = false;
  int run_threads = 1;
  DataFlags run_data;
  run->add_option("--model", run_model, "model bundle directory")->required();
  run_data.attach(run, false);
  run->add_option("--policy", run_policy, "off | oracle | bnn")
      ->check(CLI::IsMember({"off", "oracle", "bnn"}));
  run->add_option("--theta", run_theta, "reuse threshold (negative: never reuse)");
  run->add_flag("--no-throttle", run_no_throttle, "per-step epsilon only");
  run->add_option("--split", run_split, "dataset split to evaluate");
  run->add_option("--threads", run_threads, "sequence worker threads");
  run->add_option("--hw-config", run_hw_path, "hardware config JSON");
  run->add_option("--trace-format", run_trace_format, "csv | json | none")
      ->check(CLI::IsMember({"csv", "json", "none"}));
  run->add_option("--out", run_out, "output directory")->required();

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "explore reuse/accuracy across thresholds");
  std::string sw_model, sw_out, sw_policy = "bnn", sw_split = "cal";
  std::vector<double> sw_grid;
  double sw_max_loss = -1.0;
  bool sw_no_throttle = false;
  int sw_threads = 1;
  DataFlags sw_data;
  sweep->add_option("--model", sw_model, "model bundle directory")->required();
  sw_data.attach(sweep, false);
  sweep->add_option("--policy", sw_policy, "oracle | bnn")
      ->check(CLI::IsMember({"oracle", "bnn"}));
  sweep->add_option("--grid", sw_grid, "theta grid (strictly increasing)");
  sweep->add_option("--max-loss", sw_max_loss,
                    "select theta with max reuse at loss <= bound");
  sweep->add_flag("--no-throttle", sw_no_throttle, "per-step epsilon only");
  sweep->add_option("--split", sw_split, "dataset split to sweep on");
  sweep->add_option("--threads", sw_threads, "sequence worker threads");
  sweep->add_option("--out", sw_out, "output directory")->required();

  // ---- correlate ----
  auto* corr = app.add_subcommand("correlate",
                                  "per-neuron correlation between full-precision and "
                                  "binarized outputs, plus output-change stats");
  std::string co_model, co_out, co_split = "test";
  DataFlags co_data;
  corr->add_option("--model", co_model, "model bundle directory")->required();
  co_data.attach(corr, false);
  corr->add_option("--split", co_split, "dataset split");
  corr->add_option("--out", co_out, "output directory")->required();

  // ---- train ----
  auto* train = app.add_subcommand("train", "train a toy model (optionally with "
                                            "memoization in the forward pass)");
  std::string tr_out, tr_cell = "lstm", tr_name = "trained";
  std::size_t tr_hidden = 32, tr_epochs = 60, tr_batch = 32;
  double tr_lr = 0.05, tr_memo_theta = -1.0, tr_clip = 5.0;
  std::uint64_t tr_seed = 1;
  DataFlags tr_data;
  tr_data.attach(train, true);
  train->add_option("--cell", tr_cell, "lstm | gru")
      ->check(CLI::IsMember({"lstm", "gru"}));
  train->add_option("--hidden", tr_hidden, "hidden units");
  train->add_option("--epochs", tr_epochs, "training epochs");
  train->add_option("--batch", tr_batch, "batch size");
  train->add_option("--lr", tr_lr, "learning rate");
  train->add_option("--clip", tr_clip, "gradient clip norm (0 disables)");
  train->add_option("--seed", tr_seed, "training seed");
  train->add_option("--memo-theta", tr_memo_theta,
                    "enable memoization during training at this threshold");
  train->add_option("--name", tr_name, "model name in the saved manifest");
  train->add_option("--out", tr_out, "output directory (model/ + report)")->required();

  // ---- hwreport ----
  auto* hwrep = app.add_subcommand("hwreport", "cycle/energy model over a reuse trace");
  std::string hw_trace, hw_out, hw_cfg_path;
  hwrep->add_option("--trace", hw_trace, "trace CSV from `run`")->required();
  hwrep->add_option("--hw-config", hw_cfg_path, "hardware config JSON");
  hwrep->add_option("--out", hw_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    ModelPtr model = open_model(run_model);
    DatasetPtr ds = run_data.open();
    HwPtr hw = open_hw(run_hw_path);
    rm_run_options opt;
    rm_run_options_init(&opt);
    opt.policy = run_policy == "off"      ? RM_POLICY_OFF
                 : run_policy == "oracle" ? RM_POLICY_ORACLE
                                          : RM_POLICY_BNN;
    opt.theta = run_theta;
    opt.throttle = run_no_throttle ? 0 : 1;
    opt.threads = run_threads;
    opt.split = run_split.c_str();
    opt.trace_format = run_trace_format.c_str();
    rm_report* rep = nullptr;
    check(rm_run(model.get(), ds.get(), &opt, hw.get(), &rep));
    ReportPtr report(rep);
    write_report(rep, run_out);
    print_scalar(rep, "reuse_fraction", "results.reuse_fraction");
    print_scalar(rep, "accuracy", "results.accuracy.value");
    print_scalar(rep, "modeled speedup", "results.hw.speedup");
    return 0;
  }

  if (*sweep) {
    ModelPtr model = open_model(sw_model);
    DatasetPtr ds = sw_data.open();
    rm_sweep_options opt;
    rm_sweep_options_init(&opt);
    opt.policy = sw_policy == "oracle" ? RM_POLICY_ORACLE : RM_POLICY_BNN;
    opt.throttle = sw_no_throttle ? 0 : 1;
    if (!sw_grid.empty()) {
      opt.grid = sw_grid.data();
      opt.grid_len = sw_grid.size();
    }
    opt.max_loss = sw_max_loss;
    opt.threads = sw_threads;
    opt.split = sw_split.c_str();
    rm_report* rep = nullptr;
    check(rm_sweep(model.get(), ds.get(), &opt, &rep));
    ReportPtr report(rep);
    write_report(rep, sw_out);
    print_scalar(rep, "selected theta", "results.selected.theta");
    return 0;
  }

  if (*corr) {
    ModelPtr model = open_model(co_model);
    DatasetPtr ds = co_data.open();
    rm_report* rep = nullptr;
    check(rm_correlate(model.get(), ds.get(), co_split.c_str(), &rep));
    ReportPtr report(rep);
    write_report(rep, co_out);
    print_scalar(rep, "fraction r>0.6", "results.correlation.fraction_above_0.6");
    print_scalar(rep, "mean output change", "results.output_change.mean");
    return 0;
  }

  if (*train) {
    DatasetPtr ds = tr_data.open();
    rm_train_options opt;
    rm_train_options_init(&opt);
    opt.cell = tr_cell == "lstm" ? RM_CELL_LSTM : RM_CELL_GRU;
    opt.hidden = tr_hidden;
    opt.lr = tr_lr;
    opt.epochs = tr_epochs;
    opt.batch_size = tr_batch;
    opt.memo_in_training = tr_memo_theta >= 0.0 ? 1 : 0;
    opt.theta_train = tr_memo_theta >= 0.0 ? tr_memo_theta : 0.0;
    opt.seed = tr_seed;
    opt.clip_norm = tr_clip;
    opt.model_name = tr_name.c_str();
    rm_model* model = nullptr;
    rm_report* rep = nullptr;
    check(rm_train(ds.get(), &opt, &model, &rep));
    ModelPtr model_ptr(model);
    ReportPtr report(rep);
    const std::string model_dir = tr_out + "/model";
    check(rm_model_save(model, model_dir.c_str()));
    write_report(rep, tr_out);
    std::printf("saved model to %s\n", model_dir.c_str());
    print_scalar(rep, "final train loss", "results.final_train_loss");
    print_scalar(rep, "accuracy", "results.accuracy.value");
    return 0;
  }

  if (*hwrep) {
    HwPtr hw = open_hw(hw_cfg_path);
    rm_report* rep = nullptr;
    check(rm_hwreport(hw_trace.c_str(), hw.get(), &rep));
    ReportPtr report(rep);
    write_report(rep, hw_out);
    print_scalar(rep, "modeled speedup", "results.hw.speedup");
    print_scalar(rep, "energy savings", "results.hw.energy_savings_fraction");
    return 0;
  }
  return 0;
}
