#include "core/task.hpp"

#include <limits>
#include <random>

namespace rnnmemo {

const char* task_kind_name(TaskKind k) {
  return k == TaskKind::AddingProblem ? "adding" : "classify";
}

TaskKind task_kind_from_name(const std::string& s) {
  if (s == "adding") return TaskKind::AddingProblem;
  if (s == "classify") return TaskKind::SeqClassification;
  throw ValidationError("unknown task kind: " + s);
}

namespace {

Sequence make_adding_sequence(std::mt19937_64& rng, std::size_t steps) {
  std::uniform_real_distribution<float> value(-1.0f, 1.0f);
  Sequence s;
  s.steps = steps;
  s.dim = 2;
  s.data.assign(steps * 2, 0.0f);
  for (std::size_t t = 0; t < steps; ++t) {
    s.data[t * 2] = value(rng);
    s.data[t * 2 + 1] = -1.0f;
  }
  // One marked position per sequence half keeps a long dependency.
  const std::size_t half = steps / 2;
  std::uniform_int_distribution<std::size_t> first(0, half > 0 ? half - 1 : 0);
  std::uniform_int_distribution<std::size_t> second(half, steps - 1);
  const std::size_t a = first(rng);
  const std::size_t b = second(rng);
  s.data[a * 2 + 1] = 1.0f;
  s.data[b * 2 + 1] = 1.0f;
  s.label = s.data[a * 2] + s.data[b * 2];
  return s;
}

Sequence make_classify_sequence(std::mt19937_64& rng, std::size_t steps) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::normal_distribution<float> noise(0.0f, 0.8f);
  const int label = coin(rng);
  const float mean = label == 0 ? 0.6f : -0.6f;
  Sequence s;
  s.steps = steps;
  s.dim = 3;
  s.data.assign(steps * 3, 0.0f);
  for (std::size_t t = 0; t < steps; ++t) {
    s.data[t * 3] = mean + noise(rng);
    s.data[t * 3 + 1] = noise(rng);
    s.data[t * 3 + 2] = noise(rng);
  }
  s.label = static_cast<float>(label);
  return s;
}

}  // namespace

Dataset generate_task_dataset(const ToyTask& task) {
  if (task.steps < 2) throw ValidationError("task: need at least 2 steps");
  if (task.n_train + task.n_cal + task.n_test == 0) {
    throw ValidationError("task: no sequences requested");
  }
  std::mt19937_64 rng(task.seed);
  Dataset ds;
  ds.kind = task.kind == TaskKind::AddingProblem ? "regression" : "classification";
  auto gen = [&](const std::string& split, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      Sequence s = task.kind == TaskKind::AddingProblem
                       ? make_adding_sequence(rng, task.steps)
                       : make_classify_sequence(rng, task.steps);
      s.split = split;
      ds.sequences.push_back(std::move(s));
    }
  };
  gen("train", task.n_train);
  gen("cal", task.n_cal);
  gen("test", task.n_test);
  ds.validate();
  return ds;
}

double metric_loss(const AccuracyMetric& base, const AccuracyMetric& cur) {
  if (base.kind != cur.kind) throw ValidationError("metric kinds disagree");
  if (base.kind == MetricKind::Accuracy) {
    return base.value - cur.value;
  }
  if (base.value <= 0.0) {
    // Degenerate zero-error baseline: any increase counts as infinite loss.
    return cur.value <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (cur.value - base.value) / base.value;
}

}  // namespace rnnmemo
