#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/calibrate.hpp"
#include "core/dataset.hpp"
#include "core/evaluate.hpp"
#include "core/hwmodel.hpp"
#include "core/report.hpp"
#include "core/rnn.hpp"
#include "core/train.hpp"

namespace rnnmemo {

struct RunOptions {
  MemoPolicy policy;
  std::string split = "test";
  int threads = 1;
  std::string trace_format = "csv";  // csv | json | none
};

Report cmd_run(const RnnModel& model, const Dataset& ds, const RunOptions& opt,
               const HwConfig& hw);

struct SweepOptions {
  PolicyKind policy = PolicyKind::Bnn;
  bool throttle = true;
  std::vector<double> grid;  // empty -> default grid
  std::optional<double> max_loss;
  std::string split = "cal";
  int threads = 1;
};

Report cmd_sweep(const RnnModel& model, const Dataset& ds, const SweepOptions& opt);

Report cmd_correlate(const RnnModel& model, const Dataset& ds, const std::string& split);

struct TrainOptions {
  CellKind cell = CellKind::Lstm;
  std::size_t hidden = 32;
  TrainConfig config;
  std::string model_name = "trained";
};

struct TrainCommandResult {
  Report report;
  RnnModel model;
};

// Trains on the dataset's train split; the reported accuracy is computed by
// the single-precision inference path on the test split, so a saved model
// reproduces it exactly.
TrainCommandResult cmd_train(const Dataset& ds, const TrainOptions& opt);

Report cmd_hwreport(const ReuseTrace& trace, const HwConfig& hw);

nlohmann::json model_summary_json(const RnnModel& model);
nlohmann::json dataset_summary_json(const Dataset& ds);

}  // namespace rnnmemo
