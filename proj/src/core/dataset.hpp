#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace rnnmemo {

enum class MetricKind { Accuracy, Mse };

const char* metric_kind_name(MetricKind k);

// One input sequence, row-major steps x dim.
struct Sequence {
  std::size_t steps = 0;
  std::size_t dim = 0;
  std::vector<float> data;
  std::optional<float> label;
  std::string split = "test";  // train | cal | test

  std::span<const float> step(std::size_t t) const {
    return std::span<const float>(data).subspan(t * dim, dim);
  }
  std::vector<Vec> as_vectors() const;
  void validate() const;
};

struct Dataset {
  // "regression", "classification" or "none"; decides the accuracy metric.
  std::string kind = "none";
  std::vector<Sequence> sequences;

  bool labeled() const;
  MetricKind metric_kind() const;
  // Indices belonging to a split; an unknown/empty split name selects all.
  std::vector<std::size_t> split_indices(const std::string& split) const;
  void validate() const;
};

void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace rnnmemo
