#include "core/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace rnnmemo {

std::vector<double> default_theta_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.05 * i);
  return grid;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    rows_json.push_back({{"theta", r.theta},
                         {"metric", {{"kind", metric_kind_name(r.metric.kind)},
                                     {"value", r.metric.value}}},
                         {"loss", r.loss},
                         {"reuse", r.reuse}});
  }
  return {{"policy", policy_kind_name(policy)},
          {"throttle", throttle},
          {"baseline",
           {{"kind", metric_kind_name(baseline.kind)}, {"value", baseline.value}}},
          {"rows", rows_json}};
}

void SweepResult::write_csv(std::ostream& os) const {
  os << "policy,theta,metric_kind,metric,loss,reuse\n";
  os << "off,," << metric_kind_name(baseline.kind) << ',' << baseline.value << ",0,0\n";
  for (const SweepRow& r : rows) {
    os << policy_kind_name(policy) << ',' << r.theta << ','
       << metric_kind_name(r.metric.kind) << ',' << r.metric.value << ',' << r.loss << ','
       << r.reuse << "\n";
  }
}

SweepResult sweep_theta(const RnnModel& model, const Dataset& ds, const std::string& split,
                        PolicyKind policy, bool throttle, const std::vector<double>& grid,
                        int threads) {
  if (grid.empty()) throw ValidationError("sweep: empty theta grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (grid[i] >= grid[i + 1]) throw ValidationError("sweep: grid must be strictly increasing");
  }
  if (grid.front() < 0.0) throw ValidationError("sweep: negative theta in grid");
  if (policy == PolicyKind::Disabled) {
    throw ValidationError("sweep: policy must be oracle or bnn");
  }

  SweepResult result;
  result.policy = policy;
  result.throttle = throttle;

  const EvalResult base = evaluate(model, ds, split, MemoPolicy{}, threads);
  if (!base.metric) {
    throw ValidationError("sweep: dataset/model pair yields no accuracy metric");
  }
  result.baseline = *base.metric;

  for (double theta : grid) {
    const MemoPolicy p{policy, theta, throttle};
    const EvalResult ev = evaluate(model, ds, split, p, threads);
    SweepRow row;
    row.theta = theta;
    row.metric = *ev.metric;
    row.loss = metric_loss(result.baseline, row.metric);
    row.reuse = ev.trace.reuse_fraction();
    result.rows.push_back(row);
  }
  return result;
}

std::optional<double> select_theta(const SweepResult& sweep, double max_loss) {
  std::optional<double> best;
  double best_reuse = -1.0;
  for (const SweepRow& r : sweep.rows) {
    if (r.loss <= max_loss && r.reuse > best_reuse) {
      best_reuse = r.reuse;
      best = r.theta;
    }
  }
  return best;
}

double CorrelationReport::fraction_above(double cutoff) const {
  std::uint64_t total = 0;
  std::uint64_t above = 0;
  for (const CorrelationSite& s : sites) {
    if (s.zero_variance) continue;
    ++total;
    if (s.r > cutoff) ++above;
  }
  return total == 0 ? 0.0 : static_cast<double>(above) / static_cast<double>(total);
}

nlohmann::json CorrelationReport::to_json() const {
  nlohmann::json hist = nlohmann::json::array();
  for (std::size_t b = 0; b < histogram.size(); ++b) {
    hist.push_back({{"lo", -1.0 + 0.1 * static_cast<double>(b)},
                    {"hi", -1.0 + 0.1 * static_cast<double>(b + 1)},
                    {"count", histogram[b]}});
  }
  return {{"neurons", sites.size()},
          {"excluded_zero_variance", excluded},
          {"fraction_above_0.5", fraction_above(0.5)},
          {"fraction_above_0.6", fraction_above(0.6)},
          {"fraction_above_0.8", fraction_above(0.8)},
          {"histogram", hist}};
}

void CorrelationReport::write_csv(std::ostream& os) const {
  os << "layer,dir,gate,gate_name,neuron,samples,r,zero_variance\n";
  for (const CorrelationSite& s : sites) {
    os << s.layer << ',' << static_cast<int>(s.dir) << ',' << static_cast<int>(s.gate)
       << ',' << s.gate_name << ',' << s.neuron << ',' << s.samples << ',' << s.r << ','
       << (s.zero_variance ? 1 : 0) << "\n";
  }
}

nlohmann::json OutputChangeStats::to_json() const {
  nlohmann::json hist = nlohmann::json::array();
  for (std::size_t b = 0; b < histogram.size(); ++b) {
    const bool overflow = b + 1 == histogram.size();
    hist.push_back({{"lo", kBinWidth * static_cast<double>(b)},
                    {"hi", overflow ? std::numeric_limits<double>::infinity()
                                    : kBinWidth * static_cast<double>(b + 1)},
                    {"count", histogram[b]}});
  }
  return {{"mean", mean}, {"samples", samples}, {"histogram", hist}};
}

namespace {

// Streaming sums for one neuron: pre-activation (x) vs BNN output (y).
struct PairAccum {
  std::uint64_t n = 0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  double prev = 0.0;
  bool has_prev = false;

  void add(double x, double y) {
    ++n;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
};

struct SiteKey {
  std::uint16_t layer;
  std::uint8_t dir;
  std::uint8_t gate;
  std::uint32_t neuron;
  auto operator<=>(const SiteKey&) const = default;
};

// Policy-off hook that records (exact pre-activation, BNN output) pairs and
// consecutive-step changes.
class RecordingHook final : public NeuronHook {
 public:
  RecordingHook(const std::vector<BinarizedGate>& gates, std::uint16_t layer,
                std::uint8_t dir, std::map<SiteKey, PairAccum>& accum,
                OutputChangeStats& changes)
      : gates_(gates), layer_(layer), dir_(dir), accum_(accum), changes_(changes) {}

  void begin_step(std::size_t) override { ++stamp_; }

  float pre_activation(const GateSite& site, const ExactPreactivation& exact) override {
    const float value = exact();
    if (input_cache_.size() < gates_.size()) input_cache_.resize(gates_.size());
    auto& slot = input_cache_[site.gate];
    if (slot.second != stamp_) {
      slot.first = binarize_concat<float>(site.x, site.h);
      slot.second = stamp_;
    }
    const long long y_b = binary_dot(gates_[site.gate].rows[site.neuron], slot.first);
    PairAccum& acc = accum_[SiteKey{layer_, dir_, static_cast<std::uint8_t>(site.gate),
                                    static_cast<std::uint32_t>(site.neuron)}];
    acc.add(static_cast<double>(value), static_cast<double>(y_b));
    if (acc.has_prev) {
      const double change = relative_error(static_cast<double>(value), acc.prev);
      if (std::isfinite(change)) {
        changes_.mean += change;  // running sum; normalized at the end
        const auto bin = std::min<std::size_t>(
            OutputChangeStats::kBins - 1,
            static_cast<std::size_t>(change / OutputChangeStats::kBinWidth));
        ++changes_.histogram[bin];
      } else {
        ++changes_.histogram[OutputChangeStats::kBins - 1];
      }
      ++changes_.samples;
    }
    acc.prev = static_cast<double>(value);
    acc.has_prev = true;
    return value;
  }

 private:
  const std::vector<BinarizedGate>& gates_;
  std::uint16_t layer_;
  std::uint8_t dir_;
  std::map<SiteKey, PairAccum>& accum_;
  OutputChangeStats& changes_;
  std::uint64_t stamp_ = 0;
  std::vector<std::pair<BitVector, std::uint64_t>> input_cache_;
};

}  // namespace

AnalysisReport correlation_report(const RnnModel& model, const Dataset& ds,
                                  const std::string& split) {
  model.validate();
  ds.validate();
  const std::vector<std::size_t> indices = ds.split_indices(split);
  bool enough = false;
  for (std::size_t i : indices) {
    if (ds.sequences[i].steps >= 2) enough = true;
  }
  if (!enough) throw ValidationError("correlation: need sequences with >= 2 timesteps");

  // Binarize once; instances keyed by (layer, dir).
  std::vector<std::array<std::optional<std::vector<BinarizedGate>>, 2>> bnn(
      model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    bnn[l][0] = binarize_cell(model.layers[l].forward_cell);
    if (model.layers[l].backward_cell) {
      bnn[l][1] = binarize_cell(*model.layers[l].backward_cell);
    }
  }

  std::map<SiteKey, PairAccum> accum;
  AnalysisReport report;
  report.output_change.histogram.assign(OutputChangeStats::kBins, 0);

  for (std::size_t i : indices) {
    // Consecutive-change tracking restarts per sequence.
    for (auto& [key, acc] : accum) acc.has_prev = false;
    HookFactory factory = [&](std::size_t layer, std::size_t dir_instance,
                              const CellParams&) -> std::unique_ptr<NeuronHook> {
      return std::make_unique<RecordingHook>(*bnn[layer][dir_instance],
                                             static_cast<std::uint16_t>(layer),
                                             static_cast<std::uint8_t>(dir_instance),
                                             accum, report.output_change);
    };
    run_sequence(model, ds.sequences[i].as_vectors(), factory);
  }

  report.output_change.mean = report.output_change.samples == 0
                                  ? 0.0
                                  : report.output_change.mean /
                                        static_cast<double>(report.output_change.samples);

  report.correlation.histogram.assign(20, 0);
  for (const auto& [key, acc] : accum) {
    CorrelationSite site;
    site.layer = key.layer;
    site.dir = key.dir;
    site.gate = key.gate;
    const CellParams& cell = key.dir == 0 ? model.layers[key.layer].forward_cell
                                          : *model.layers[key.layer].backward_cell;
    site.gate_name = gate_name(cell_kind(cell), key.gate);
    site.neuron = key.neuron;
    site.samples = acc.n;
    if (acc.n < 2) throw ValidationError("correlation: insufficient samples per neuron");
    const double n = static_cast<double>(acc.n);
    const double var_x = acc.sxx - acc.sx * acc.sx / n;
    const double var_y = acc.syy - acc.sy * acc.sy / n;
    if (var_x <= 1e-18 || var_y <= 1e-18) {
      site.zero_variance = true;
      site.r = 0.0;
      ++report.correlation.excluded;
    } else {
      const double cov = acc.sxy - acc.sx * acc.sy / n;
      site.r = cov / std::sqrt(var_x * var_y);
      site.r = std::clamp(site.r, -1.0, 1.0);
      const auto bin = std::min<std::size_t>(
          19, static_cast<std::size_t>((site.r + 1.0) / 0.1));
      ++report.correlation.histogram[bin];
    }
    report.correlation.sites.push_back(std::move(site));
  }
  return report;
}

}  // namespace rnnmemo
