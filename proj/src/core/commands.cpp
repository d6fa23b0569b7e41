#include "core/commands.hpp"

#include <chrono>
#include <sstream>

namespace rnnmemo {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

nlohmann::json policy_json(const MemoPolicy& p) {
  return {{"kind", policy_kind_name(p.kind)}, {"theta", p.theta}, {"throttle", p.throttle}};
}

nlohmann::json metric_json(const std::optional<AccuracyMetric>& m) {
  if (!m) return nullptr;
  return {{"kind", metric_kind_name(m->kind)}, {"value", m->value}};
}

}  // namespace

nlohmann::json model_summary_json(const RnnModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& l : model.layers) {
    layers.push_back({{"cell", cell_kind_name(l.kind())},
                      {"direction", direction_name(l.direction)},
                      {"input_dim", l.input_dim()},
                      {"hidden_dim", l.hidden_dim()}});
  }
  return {{"name", model.name},
          {"input_dim", model.input_dim},
          {"output_dim", model.output_dim()},
          {"has_readout", model.readout.has_value()},
          {"layers", layers}};
}

nlohmann::json dataset_summary_json(const Dataset& ds) {
  std::size_t steps_min = SIZE_MAX, steps_max = 0;
  for (const Sequence& s : ds.sequences) {
    steps_min = std::min(steps_min, s.steps);
    steps_max = std::max(steps_max, s.steps);
  }
  return {{"kind", ds.kind},
          {"sequences", ds.sequences.size()},
          {"feature_dim", ds.sequences.empty() ? 0 : ds.sequences.front().dim},
          {"steps_min", steps_min},
          {"steps_max", steps_max},
          {"labeled", ds.labeled()}};
}

Report cmd_run(const RnnModel& model, const Dataset& ds, const RunOptions& opt,
               const HwConfig& hw) {
  const double t0 = now_ms();
  const EvalResult ev = evaluate(model, ds, opt.split, opt.policy, opt.threads);
  const HwCostReport cost = aggregate(ev.trace, hw);

  nlohmann::json per_seq = nlohmann::json::array();
  for (std::size_t i = 0; i < ev.sequences.size(); ++i) {
    per_seq.push_back({{"index", i},
                       {"steps", ev.sequences[i].steps},
                       {"reuse", ev.sequences[i].reuse}});
  }

  Report rep;
  rep.body = {{"format_version", 1},
              {"command", "run"},
              {"config",
               {{"policy", policy_json(opt.policy)},
                {"split", opt.split},
                {"threads", opt.threads},
                {"hw", hw.to_json()},
                {"model", model_summary_json(model)},
                {"dataset", dataset_summary_json(ds)}}},
              {"results",
               {{"reuse_fraction", ev.trace.reuse_fraction()},
                {"evaluations", ev.trace.evaluations()},
                {"hits", ev.trace.hits()},
                {"accuracy", metric_json(ev.metric)},
                {"hw", cost.to_json()},
                {"per_sequence", per_seq}}}};
  rep.seal();
  rep.body["timing_ms"] = now_ms() - t0;

  if (opt.trace_format == "csv") {
    std::ostringstream os;
    ev.trace.write_csv(os);
    rep.artifacts.emplace_back("trace.csv", os.str());
  } else if (opt.trace_format == "json") {
    rep.artifacts.emplace_back("trace.json", ev.trace.to_json().dump(2) + "\n");
  } else if (opt.trace_format != "none") {
    throw ValidationError("run: unknown trace format " + opt.trace_format);
  }
  return rep;
}

Report cmd_sweep(const RnnModel& model, const Dataset& ds, const SweepOptions& opt) {
  const double t0 = now_ms();
  const std::vector<double> grid = opt.grid.empty() ? default_theta_grid() : opt.grid;
  const SweepResult sweep =
      sweep_theta(model, ds, opt.split, opt.policy, opt.throttle, grid, opt.threads);

  nlohmann::json selected = nullptr;
  if (opt.max_loss) {
    if (const auto theta = select_theta(sweep, *opt.max_loss)) {
      selected = {{"theta", *theta}, {"max_loss", *opt.max_loss}};
    } else {
      selected = {{"theta", nullptr},
                  {"max_loss", *opt.max_loss},
                  {"warning", "no grid point satisfies the loss bound; stay disabled"}};
    }
  }

  Report rep;
  rep.body = {{"format_version", 1},
              {"command", "sweep"},
              {"config",
               {{"policy", policy_kind_name(opt.policy)},
                {"throttle", opt.throttle},
                {"grid", grid},
                {"split", opt.split},
                {"threads", opt.threads},
                {"max_loss", opt.max_loss ? nlohmann::json(*opt.max_loss) : nullptr},
                {"model", model_summary_json(model)},
                {"dataset", dataset_summary_json(ds)}}},
              {"results", {{"sweep", sweep.to_json()}, {"selected", selected}}}};
  rep.seal();
  rep.body["timing_ms"] = now_ms() - t0;

  std::ostringstream csv;
  sweep.write_csv(csv);
  rep.artifacts.emplace_back("sweep.csv", csv.str());

  std::vector<std::pair<double, double>> reuse_vs_theta, acc_vs_theta, reuse_vs_loss;
  for (const SweepRow& r : sweep.rows) {
    reuse_vs_theta.emplace_back(r.theta, r.reuse);
    acc_vs_theta.emplace_back(r.theta, r.metric.value);
    reuse_vs_loss.emplace_back(r.loss, r.reuse);
  }
  rep.artifacts.emplace_back("series/reuse_vs_theta.xy", two_column_series(reuse_vs_theta));
  rep.artifacts.emplace_back("series/accuracy_vs_theta.xy", two_column_series(acc_vs_theta));
  rep.artifacts.emplace_back("series/reuse_vs_loss.xy", two_column_series(reuse_vs_loss));
  return rep;
}

Report cmd_correlate(const RnnModel& model, const Dataset& ds, const std::string& split) {
  const double t0 = now_ms();
  const AnalysisReport analysis = correlation_report(model, ds, split);

  Report rep;
  rep.body = {{"format_version", 1},
              {"command", "correlate"},
              {"config",
               {{"split", split},
                {"model", model_summary_json(model)},
                {"dataset", dataset_summary_json(ds)}}},
              {"results",
               {{"correlation", analysis.correlation.to_json()},
                {"output_change", analysis.output_change.to_json()}}}};
  rep.seal();
  rep.body["timing_ms"] = now_ms() - t0;

  std::ostringstream csv;
  analysis.correlation.write_csv(csv);
  rep.artifacts.emplace_back("correlation.csv", csv.str());

  std::vector<std::pair<double, double>> hist;
  for (std::size_t b = 0; b < analysis.correlation.histogram.size(); ++b) {
    hist.emplace_back(-1.0 + 0.1 * (static_cast<double>(b) + 0.5),
                      static_cast<double>(analysis.correlation.histogram[b]));
  }
  rep.artifacts.emplace_back("series/correlation_hist.xy", two_column_series(hist));

  std::vector<std::pair<double, double>> change_hist;
  for (std::size_t b = 0; b < analysis.output_change.histogram.size(); ++b) {
    change_hist.emplace_back(
        OutputChangeStats::kBinWidth * (static_cast<double>(b) + 0.5),
        static_cast<double>(analysis.output_change.histogram[b]));
  }
  rep.artifacts.emplace_back("series/output_change_hist.xy",
                             two_column_series(change_hist));
  return rep;
}

TrainCommandResult cmd_train(const Dataset& ds, const TrainOptions& opt) {
  const double t0 = now_ms();
  ds.validate();
  if (!ds.labeled()) throw ValidationError("train: dataset must be labeled");
  const std::size_t readout_dim = ds.metric_kind() == MetricKind::Mse ? 1 : 2;
  TrainModel init = init_train_model(opt.cell, ds.sequences.front().dim, opt.hidden,
                                     readout_dim, opt.config.seed);
  TrainOutput trained = train(std::move(init), ds, opt.config);
  RnnModel model = trained.model.to_rnn_model(opt.model_name);

  // Final metric via the inference path, so run on the saved model matches.
  const EvalResult ev = evaluate(model, ds, "test", MemoPolicy{}, 1);

  Report rep;
  rep.body = {{"format_version", 1},
              {"command", "train"},
              {"config",
               {{"cell", cell_kind_name(opt.cell)},
                {"hidden", opt.hidden},
                {"lr", opt.config.lr},
                {"epochs", opt.config.epochs},
                {"batch_size", opt.config.batch_size},
                {"memo_in_training", opt.config.memo_in_training},
                {"theta_train", opt.config.theta_train},
                {"seed", opt.config.seed},
                {"clip_norm", opt.config.clip_norm},
                {"dataset", dataset_summary_json(ds)}}},
              {"results",
               {{"final_train_loss",
                 trained.loss_curve.empty() ? nullptr
                                            : nlohmann::json(trained.loss_curve.back())},
                {"epochs_run", trained.loss_curve.size()},
                {"accuracy", metric_json(ev.metric)},
                {"model", model_summary_json(model)}}}};
  rep.seal();
  rep.body["timing_ms"] = now_ms() - t0;

  std::ostringstream curve;
  curve << "epoch,train_loss\n";
  for (std::size_t e = 0; e < trained.loss_curve.size(); ++e) {
    curve << e << ',' << trained.loss_curve[e] << "\n";
  }
  rep.artifacts.emplace_back("loss_curve.csv", curve.str());

  return TrainCommandResult{std::move(rep), std::move(model)};
}

Report cmd_hwreport(const ReuseTrace& trace, const HwConfig& hw) {
  const double t0 = now_ms();
  const HwCostReport cost = aggregate(trace, hw);

  Report rep;
  rep.body = {{"format_version", 1},
              {"command", "hwreport"},
              {"config",
               {{"hw", hw.to_json()},
                {"trace",
                 {{"policy", policy_kind_name(trace.policy)},
                  {"theta", trace.theta},
                  {"sequences", trace.sequences},
                  {"records", trace.records.size()}}}}},
              {"results", {{"hw", cost.to_json()}}}};
  rep.seal();
  rep.body["timing_ms"] = now_ms() - t0;

  std::ostringstream csv;
  cost.write_csv(csv);
  rep.artifacts.emplace_back("hw.csv", csv.str());
  return rep;
}

}  // namespace rnnmemo
