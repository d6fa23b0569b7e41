#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/memo.hpp"
#include "core/rnn.hpp"
#include "core/task.hpp"

namespace rnnmemo {

struct SequenceEval {
  std::vector<Vec> outputs;  // top-layer h_t per timestep
  Vec prediction;            // readout(last step) when the model has a head
  double reuse = 0.0;
  std::size_t steps = 0;
};

struct EvalResult {
  std::vector<SequenceEval> sequences;
  ReuseTrace trace;
  // Present when the dataset is labeled and the model has a readout.
  std::optional<AccuracyMetric> metric;
};

// Runs every selected sequence with fresh memoization state per (sequence,
// layer, direction) instance. Sequences may be evaluated by a small worker
// pool; results are merged in sequence order so the output is independent of
// the thread count.
EvalResult evaluate(const RnnModel& model, const Dataset& ds, const std::string& split,
                    const MemoPolicy& policy, int threads = 1);

AccuracyMetric compute_metric(const Dataset& ds, const std::vector<std::size_t>& indices,
                              const std::vector<SequenceEval>& evals);

}  // namespace rnnmemo
