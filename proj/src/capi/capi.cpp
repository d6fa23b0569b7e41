#include "rnnmemo.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "core/commands.hpp"
#include "core/io.hpp"
#include "core/model_io.hpp"

using namespace rnnmemo;

struct rm_model {
  RnnModel model;
};
struct rm_dataset {
  Dataset ds;
};
struct rm_hwconfig {
  HwConfig cfg;
};
struct rm_report {
  Report report;
};

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

template <class Fn>
rm_status guarded(Fn&& fn) {
  try {
    fn();
    return RM_OK;
  } catch (const DimensionError& e) {
    set_error(e.what());
    return RM_ERR_DIMENSION;
  } catch (const ValidationError& e) {
    set_error(e.what());
    return RM_ERR_VALIDATION;
  } catch (const IoError& e) {
    set_error(e.what());
    return RM_ERR_IO;
  } catch (const NumericError& e) {
    set_error(e.what());
    return RM_ERR_NUMERIC;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return RM_ERR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    set_error(e.what());
    return RM_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return RM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return RM_ERR_INTERNAL;
  }
}

rm_status require(bool ok, const char* msg) {
  if (ok) return RM_OK;
  set_error(msg);
  return RM_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

MemoPolicy to_policy(rm_policy_kind kind, double theta, int throttle) {
  MemoPolicy p;
  switch (kind) {
    case RM_POLICY_OFF: p.kind = PolicyKind::Disabled; break;
    case RM_POLICY_ORACLE: p.kind = PolicyKind::Oracle; break;
    case RM_POLICY_BNN: p.kind = PolicyKind::Bnn; break;
    default: throw ValidationError("unknown policy kind");
  }
  p.theta = theta;
  p.throttle = throttle != 0;
  return p;
}

}  // namespace

extern "C" {

const char* rm_version(void) { return "0.1.0"; }

const char* rm_status_name(rm_status s) {
  switch (s) {
    case RM_OK: return "ok";
    case RM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case RM_ERR_DIMENSION: return "dimension_error";
    case RM_ERR_VALIDATION: return "validation_error";
    case RM_ERR_IO: return "io_error";
    case RM_ERR_NUMERIC: return "numeric_error";
    case RM_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* rm_last_error(void) { return t_last_error.c_str(); }

void rm_string_free(char* s) { ::free(s); }

rm_status rm_model_load(const char* bundle_dir, rm_model** out) {
  if (rm_status s = require(bundle_dir && out, "null argument"); s != RM_OK) return s;
  return guarded([&] { *out = new rm_model{load_model(bundle_dir)}; });
}

rm_status rm_model_save(const rm_model* model, const char* bundle_dir) {
  if (rm_status s = require(model && bundle_dir, "null argument"); s != RM_OK) return s;
  return guarded([&] { save_model(model->model, bundle_dir); });
}

rm_status rm_model_info_json(const rm_model* model, char** json_out) {
  if (rm_status s = require(model && json_out, "null argument"); s != RM_OK) return s;
  return guarded([&] {
    *json_out = dup_string(model_summary_json(model->model).dump(2));
    if (!*json_out) throw std::bad_alloc();
  });
}

void rm_model_free(rm_model* model) { delete model; }

rm_status rm_dataset_load(const char* dir, rm_dataset** out) {
  if (rm_status s = require(dir && out, "null argument"); s != RM_OK) return s;
  return guarded([&] { *out = new rm_dataset{load_dataset(dir)}; });
}

rm_status rm_dataset_save(const rm_dataset* ds, const char* dir) {
  if (rm_status s = require(ds && dir, "null argument"); s != RM_OK) return s;
  return guarded([&] { save_dataset(ds->ds, dir); });
}

rm_status rm_dataset_synth(rm_task_kind task, uint64_t seed, size_t steps, size_t n_train,
                           size_t n_cal, size_t n_test, rm_dataset** out) {
  if (rm_status s = require(out != nullptr, "null argument"); s != RM_OK) return s;
  return guarded([&] {
    ToyTask t;
    t.kind = task == RM_TASK_ADDING ? TaskKind::AddingProblem : TaskKind::SeqClassification;
    t.seed = seed;
    t.steps = steps;
    t.n_train = n_train;
    t.n_cal = n_cal;
    t.n_test = n_test;
    *out = new rm_dataset{generate_task_dataset(t)};
  });
}

void rm_dataset_free(rm_dataset* ds) { delete ds; }

rm_status rm_hwconfig_default(rm_hwconfig** out) {
  if (rm_status s = require(out != nullptr, "null argument"); s != RM_OK) return s;
  return guarded([&] {
    HwConfig cfg;
    cfg.validate();
    *out = new rm_hwconfig{cfg};
  });
}

rm_status rm_hwconfig_load(const char* json_path, rm_hwconfig** out) {
  if (rm_status s = require(json_path && out, "null argument"); s != RM_OK) return s;
  return guarded([&] { *out = new rm_hwconfig{HwConfig::from_json(read_json_file(json_path))}; });
}

void rm_hwconfig_free(rm_hwconfig* cfg) { delete cfg; }

void rm_run_options_init(rm_run_options* opt) {
  if (!opt) return;
  opt->policy = RM_POLICY_OFF;
  opt->theta = 0.0;
  opt->throttle = 1;
  opt->threads = 1;
  opt->split = nullptr;
  opt->trace_format = nullptr;
}

rm_status rm_run(const rm_model* model, const rm_dataset* ds, const rm_run_options* opt,
                 const rm_hwconfig* hw, rm_report** out) {
  if (rm_status s = require(model && ds && opt && hw && out, "null argument"); s != RM_OK) {
    return s;
  }
  return guarded([&] {
    RunOptions ro;
    ro.policy = to_policy(opt->policy, opt->theta, opt->throttle);
    ro.threads = opt->threads;
    if (opt->split) ro.split = opt->split;
    if (opt->trace_format) ro.trace_format = opt->trace_format;
    *out = new rm_report{cmd_run(model->model, ds->ds, ro, hw->cfg)};
  });
}

void rm_sweep_options_init(rm_sweep_options* opt) {
  if (!opt) return;
  opt->policy = RM_POLICY_BNN;
  opt->throttle = 1;
  opt->grid = nullptr;
  opt->grid_len = 0;
  opt->max_loss = -1.0;
  opt->threads = 1;
  opt->split = nullptr;
}

rm_status rm_sweep(const rm_model* model, const rm_dataset* ds, const rm_sweep_options* opt,
                   rm_report** out) {
  if (rm_status s = require(model && ds && opt && out, "null argument"); s != RM_OK) {
    return s;
  }
  return guarded([&] {
    SweepOptions so;
    so.policy = to_policy(opt->policy, 0.0, opt->throttle).kind;
    so.throttle = opt->throttle != 0;
    if (opt->grid && opt->grid_len > 0) {
      so.grid.assign(opt->grid, opt->grid + opt->grid_len);
    }
    if (opt->max_loss >= 0.0) so.max_loss = opt->max_loss;
    so.threads = opt->threads;
    if (opt->split) so.split = opt->split;
    *out = new rm_report{cmd_sweep(model->model, ds->ds, so)};
  });
}

rm_status rm_correlate(const rm_model* model, const rm_dataset* ds, const char* split,
                       rm_report** out) {
  if (rm_status s = require(model && ds && out, "null argument"); s != RM_OK) return s;
  return guarded([&] {
    *out = new rm_report{cmd_correlate(model->model, ds->ds, split ? split : "test")};
  });
}

void rm_train_options_init(rm_train_options* opt) {
  if (!opt) return;
  opt->cell = RM_CELL_LSTM;
  opt->hidden = 32;
  opt->lr = 0.05;
  opt->epochs = 60;
  opt->batch_size = 32;
  opt->theta_train = 0.0;
  opt->memo_in_training = 0;
  opt->seed = 1;
  opt->clip_norm = 5.0;
  opt->model_name = nullptr;
}

rm_status rm_train(const rm_dataset* ds, const rm_train_options* opt, rm_model** model_out,
                   rm_report** report_out) {
  if (rm_status s = require(ds && opt && model_out && report_out, "null argument");
      s != RM_OK) {
    return s;
  }
  return guarded([&] {
    TrainOptions to;
    to.cell = opt->cell == RM_CELL_LSTM ? CellKind::Lstm : CellKind::Gru;
    to.hidden = opt->hidden;
    to.config.lr = opt->lr;
    to.config.epochs = opt->epochs;
    to.config.batch_size = opt->batch_size;
    to.config.theta_train = opt->theta_train;
    to.config.memo_in_training = opt->memo_in_training != 0;
    to.config.seed = opt->seed;
    to.config.clip_norm = opt->clip_norm;
    if (opt->model_name) to.model_name = opt->model_name;
    TrainCommandResult result = cmd_train(ds->ds, to);
    *model_out = new rm_model{std::move(result.model)};
    *report_out = new rm_report{std::move(result.report)};
  });
}

rm_status rm_hwreport(const char* trace_csv_path, const rm_hwconfig* hw, rm_report** out) {
  if (rm_status s = require(trace_csv_path && hw && out, "null argument"); s != RM_OK) {
    return s;
  }
  return guarded([&] {
    std::ifstream is(trace_csv_path);
    if (!is) throw IoError(std::string("cannot open trace: ") + trace_csv_path);
    const ReuseTrace trace = ReuseTrace::read_csv(is);
    *out = new rm_report{cmd_hwreport(trace, hw->cfg)};
  });
}

rm_status rm_report_json(const rm_report* rep, char** json_out) {
  if (rm_status s = require(rep && json_out, "null argument"); s != RM_OK) return s;
  return guarded([&] {
    *json_out = dup_string(rep->report.body.dump(2));
    if (!*json_out) throw std::bad_alloc();
  });
}

rm_status rm_report_write(const rm_report* rep, const char* dir) {
  if (rm_status s = require(rep && dir, "null argument"); s != RM_OK) return s;
  return guarded([&] { rep->report.write(dir); });
}

double rm_report_scalar(const rm_report* rep, const char* dotted_path) {
  if (!rep || !dotted_path) return std::nan("");
  return rep->report.scalar(dotted_path);
}

void rm_report_free(rm_report* rep) { delete rep; }

}  // extern "C"
