#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/evaluate.hpp"

#include "json.hpp"

namespace rnnmemo {

struct SweepRow {
  double theta = 0.0;
  AccuracyMetric metric;
  double loss = 0.0;  // vs. the policy-off baseline
  double reuse = 0.0;
};

struct SweepResult {
  PolicyKind policy = PolicyKind::Bnn;
  bool throttle = true;
  AccuracyMetric baseline;  // policy-off row, always present
  std::vector<SweepRow> rows;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& os) const;
};

std::vector<double> default_theta_grid();

// Runs full inference once per grid point with fresh memo state, recording
// accuracy and reuse. The grid must be strictly increasing.
SweepResult sweep_theta(const RnnModel& model, const Dataset& ds, const std::string& split,
                        PolicyKind policy, bool throttle, const std::vector<double>& grid,
                        int threads = 1);

// Grid theta with maximal reuse subject to loss <= max_loss; ties take the
// smaller theta. Empty result means no grid point qualifies (stay disabled).
std::optional<double> select_theta(const SweepResult& sweep, double max_loss);

struct CorrelationSite {
  std::uint16_t layer = 0;
  std::uint8_t dir = 0;
  std::uint8_t gate = 0;
  std::string gate_name;
  std::uint32_t neuron = 0;
  std::uint64_t samples = 0;
  double r = 0.0;
  bool zero_variance = false;
};

struct CorrelationReport {
  std::vector<CorrelationSite> sites;
  // 20 uniform bins over [-1, 1], zero-variance sites excluded.
  std::vector<std::uint64_t> histogram;
  std::uint64_t excluded = 0;
  double fraction_above(double cutoff) const;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& os) const;
};

// Distribution of per-step relative pre-activation change between
// consecutive timesteps (same zero rule as relative_error).
struct OutputChangeStats {
  // Bins of width 0.05 over [0, 2), plus a final overflow bin.
  std::vector<std::uint64_t> histogram;
  double mean = 0.0;
  std::uint64_t samples = 0;

  static constexpr double kBinWidth = 0.05;
  static constexpr std::size_t kBins = 41;

  nlohmann::json to_json() const;
};

struct AnalysisReport {
  CorrelationReport correlation;
  OutputChangeStats output_change;
};

// Pearson correlation between each neuron's full-precision pre-activation
// and its BNN output, collected during memoization-disabled inference over
// the split. Needs at least 2 timesteps per neuron.
AnalysisReport correlation_report(const RnnModel& model, const Dataset& ds,
                                  const std::string& split);

}  // namespace rnnmemo
