#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rnnmemo {

// A finished command result: the report JSON plus any sidecar artifacts
// (trace CSV, sweep CSV, plot series...), all produced deterministically.
// `timing_ms` is attached at the top level and excluded from the config
// hash so reruns produce identical hashed content.
struct Report {
  nlohmann::json body;  // includes "config" and "results"
  std::vector<std::pair<std::string, std::string>> artifacts;  // relpath -> content

  // FNV-1a of the canonical config dump, stored as body["config_hash"].
  void seal();
  // Writes report.json and all artifacts under dir (atomic per file).
  void write(const std::string& dir) const;
  // Dotted-path scalar lookup into the body, NaN when absent.
  double scalar(const std::string& dotted_path) const;
};

std::string two_column_series(const std::vector<std::pair<double, double>>& xy);

}  // namespace rnnmemo
