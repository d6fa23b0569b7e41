#pragma once

#include <cstdint>
#include <string>

#include "core/dataset.hpp"

namespace rnnmemo {

enum class TaskKind { AddingProblem, SeqClassification };

const char* task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& s);

// Synthetic sequence tasks, generated deterministically from a seed.
//
// AddingProblem: feature 0 holds values drawn from U(-1, 1); feature 1 is a
// marker channel that is -1 everywhere except at two positions (one per
// sequence half) where it is +1. The target is the sum of the two marked
// values. Regression, scalar readout.
//
// SeqClassification: two balanced classes. Feature 0 carries a class-
// dependent mean (+0.6 / -0.6) buried in Gaussian noise; remaining features
// are pure noise. Classification, two-logit readout.
struct ToyTask {
  TaskKind kind = TaskKind::AddingProblem;
  std::size_t steps = 30;
  std::uint64_t seed = 1;
  std::size_t n_train = 0;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;

  std::size_t feature_dim() const { return kind == TaskKind::AddingProblem ? 2 : 3; }
  std::size_t readout_dim() const { return kind == TaskKind::AddingProblem ? 1 : 2; }
};

Dataset generate_task_dataset(const ToyTask& task);

// Scalar metric computed from readout predictions: classification accuracy
// (fraction correct, higher is better) or regression MSE (lower is better).
struct AccuracyMetric {
  MetricKind kind = MetricKind::Mse;
  double value = 0.0;
};

// Loss of `cur` relative to `base`: absolute drop for accuracy metrics,
// relative increase for MSE.
double metric_loss(const AccuracyMetric& base, const AccuracyMetric& cur);

}  // namespace rnnmemo
