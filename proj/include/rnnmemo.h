/* rnnmemo - neuron-level fuzzy memoization for recurrent networks.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed by these functions; every fallible call returns an rm_status
 * and leaves a human-readable message in rm_last_error() on failure.
 * Handles are immutable after creation and may be shared across threads;
 * rm_last_error() is thread-local.
 */
#ifndef RNNMEMO_H
#define RNNMEMO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rm_status {
  RM_OK = 0,
  RM_ERR_INVALID_ARGUMENT = 1,
  RM_ERR_DIMENSION = 2,
  RM_ERR_VALIDATION = 3,
  RM_ERR_IO = 4,
  RM_ERR_NUMERIC = 5,
  RM_ERR_INTERNAL = 6
} rm_status;

typedef enum rm_policy_kind {
  RM_POLICY_OFF = 0,
  RM_POLICY_ORACLE = 1,
  RM_POLICY_BNN = 2
} rm_policy_kind;

typedef enum rm_task_kind {
  RM_TASK_ADDING = 0,  /* regression: recall two marked values, predict sum */
  RM_TASK_CLASSIFY = 1 /* two-class sequence classification */
} rm_task_kind;

typedef enum rm_cell_kind { RM_CELL_LSTM = 0, RM_CELL_GRU = 1 } rm_cell_kind;

typedef struct rm_model rm_model;
typedef struct rm_dataset rm_dataset;
typedef struct rm_hwconfig rm_hwconfig;
typedef struct rm_report rm_report;

const char* rm_version(void);
const char* rm_status_name(rm_status s);
/* Message for the most recent failure on this thread. */
const char* rm_last_error(void);
void rm_string_free(char* s);

/* --- models (directory bundle: manifest.json + raw float32 blobs) --- */
rm_status rm_model_load(const char* bundle_dir, rm_model** out);
rm_status rm_model_save(const rm_model* model, const char* bundle_dir);
rm_status rm_model_info_json(const rm_model* model, char** json_out);
void rm_model_free(rm_model* model);

/* --- datasets --- */
rm_status rm_dataset_load(const char* dir, rm_dataset** out);
rm_status rm_dataset_save(const rm_dataset* ds, const char* dir);
/* Deterministic synthetic task data split into train/cal/test. */
rm_status rm_dataset_synth(rm_task_kind task, uint64_t seed, size_t steps,
                           size_t n_train, size_t n_cal, size_t n_test,
                           rm_dataset** out);
void rm_dataset_free(rm_dataset* ds);

/* --- hardware model configuration --- */
rm_status rm_hwconfig_default(rm_hwconfig** out);
rm_status rm_hwconfig_load(const char* json_path, rm_hwconfig** out);
void rm_hwconfig_free(rm_hwconfig* cfg);

/* --- commands --- */
typedef struct rm_run_options {
  rm_policy_kind policy;
  double theta;     /* negative: predictor on but reuse impossible */
  int throttle;     /* accumulate relative differences across reuses */
  int threads;
  const char* split;        /* "train" | "cal" | "test" | "all"; NULL = test */
  const char* trace_format; /* "csv" | "json" | "none"; NULL = csv */
} rm_run_options;
void rm_run_options_init(rm_run_options* opt);

rm_status rm_run(const rm_model* model, const rm_dataset* ds,
                 const rm_run_options* opt, const rm_hwconfig* hw, rm_report** out);

typedef struct rm_sweep_options {
  rm_policy_kind policy; /* oracle or bnn */
  int throttle;
  const double* grid; /* strictly increasing; NULL = default 0.05..0.5 */
  size_t grid_len;
  double max_loss; /* negative: no selection */
  int threads;
  const char* split; /* NULL = cal */
} rm_sweep_options;
void rm_sweep_options_init(rm_sweep_options* opt);

rm_status rm_sweep(const rm_model* model, const rm_dataset* ds,
                   const rm_sweep_options* opt, rm_report** out);

rm_status rm_correlate(const rm_model* model, const rm_dataset* ds, const char* split,
                       rm_report** out);

typedef struct rm_train_options {
  rm_cell_kind cell;
  size_t hidden;
  double lr;
  size_t epochs;
  size_t batch_size;
  double theta_train;
  int memo_in_training;
  uint64_t seed;
  double clip_norm; /* 0 disables clipping */
  const char* model_name; /* NULL = "trained" */
} rm_train_options;
void rm_train_options_init(rm_train_options* opt);

rm_status rm_train(const rm_dataset* ds, const rm_train_options* opt,
                   rm_model** model_out, rm_report** report_out);

rm_status rm_hwreport(const char* trace_csv_path, const rm_hwconfig* hw, rm_report** out);

/* --- reports --- */
rm_status rm_report_json(const rm_report* rep, char** json_out);
/* Writes report.json plus sidecar artifacts (trace/sweep CSV, series files)
 * into dir. Each file is written to a temp name and atomically renamed. */
rm_status rm_report_write(const rm_report* rep, const char* dir);
/* Dotted-path lookup into the report JSON ("results.reuse_fraction");
 * returns NaN when the path is absent or not a number. */
double rm_report_scalar(const rm_report* rep, const char* dotted_path);
void rm_report_free(rm_report* rep);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RNNMEMO_H */
