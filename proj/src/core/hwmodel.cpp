#include "core/hwmodel.hpp"

#include <algorithm>
#include <map>
#include <ostream>

namespace rnnmemo {

void HwConfig::validate() const {
  if (dpu_width == 0 || bdpu_width == 0) {
    throw ValidationError("hw config: unit widths must be positive");
  }
  const double events[] = {energy.fp_mac,        energy.weight_byte_read,
                           energy.input_byte_read, energy.sign_bit_read,
                           energy.xnor_pop_pass,  energy.memo_buffer_access,
                           energy.mu_op,          energy.dram_byte};
  for (double e : events) {
    if (e <= 0.0) throw ValidationError("hw config: energy-per-event must be positive");
  }
  const double rates[] = {leakage.scratchpad, leakage.operations, leakage.dram, leakage.fmu};
  for (double r : rates) {
    if (r < 0.0) throw ValidationError("hw config: static rates must be non-negative");
  }
  // A hit must save energy: skipping a full evaluation removes the MAC,
  // weight-byte and input-byte events, all positive, so any valid config
  // satisfies it. Kept as an explicit guard for pathological overrides.
  if (energy.fp_mac + 4.0 * energy.weight_byte_read + 4.0 * energy.input_byte_read <= 0.0) {
    throw ValidationError("hw config: full evaluation must cost more than a reuse");
  }
}

nlohmann::json HwConfig::to_json() const {
  return {{"dpu_width", dpu_width},
          {"bdpu_width", bdpu_width},
          {"fmu_latency", fmu_latency},
          {"fmu_overlap", fmu_overlap},
          {"energy_per_event",
           {{"fp_mac", energy.fp_mac},
            {"weight_byte_read", energy.weight_byte_read},
            {"input_byte_read", energy.input_byte_read},
            {"sign_bit_read", energy.sign_bit_read},
            {"xnor_pop_pass", energy.xnor_pop_pass},
            {"memo_buffer_access", energy.memo_buffer_access},
            {"mu_op", energy.mu_op},
            {"dram_byte", energy.dram_byte}}},
          {"static_rate_per_cycle",
           {{"scratchpad", leakage.scratchpad},
            {"operations", leakage.operations},
            {"dram", leakage.dram},
            {"fmu", leakage.fmu}}}};
}

HwConfig HwConfig::from_json(const nlohmann::json& j) {
  HwConfig cfg;
  cfg.dpu_width = j.value("dpu_width", cfg.dpu_width);
  cfg.bdpu_width = j.value("bdpu_width", cfg.bdpu_width);
  cfg.fmu_latency = j.value("fmu_latency", cfg.fmu_latency);
  cfg.fmu_overlap = j.value("fmu_overlap", cfg.fmu_overlap);
  if (j.contains("energy_per_event")) {
    const auto& e = j.at("energy_per_event");
    cfg.energy.fp_mac = e.value("fp_mac", cfg.energy.fp_mac);
    cfg.energy.weight_byte_read = e.value("weight_byte_read", cfg.energy.weight_byte_read);
    cfg.energy.input_byte_read = e.value("input_byte_read", cfg.energy.input_byte_read);
    cfg.energy.sign_bit_read = e.value("sign_bit_read", cfg.energy.sign_bit_read);
    cfg.energy.xnor_pop_pass = e.value("xnor_pop_pass", cfg.energy.xnor_pop_pass);
    cfg.energy.memo_buffer_access =
        e.value("memo_buffer_access", cfg.energy.memo_buffer_access);
    cfg.energy.mu_op = e.value("mu_op", cfg.energy.mu_op);
    cfg.energy.dram_byte = e.value("dram_byte", cfg.energy.dram_byte);
  }
  if (j.contains("static_rate_per_cycle")) {
    const auto& s = j.at("static_rate_per_cycle");
    cfg.leakage.scratchpad = s.value("scratchpad", cfg.leakage.scratchpad);
    cfg.leakage.operations = s.value("operations", cfg.leakage.operations);
    cfg.leakage.dram = s.value("dram", cfg.leakage.dram);
    cfg.leakage.fmu = s.value("fmu", cfg.leakage.fmu);
  }
  cfg.validate();
  return cfg;
}

std::uint64_t neuron_cycles_full(std::size_t f, std::size_t r, const HwConfig& cfg) {
  const std::uint64_t ops = f + r;
  return (ops + cfg.dpu_width - 1) / cfg.dpu_width;
}

std::uint64_t fmu_passes(std::size_t f, std::size_t r, const HwConfig& cfg) {
  const std::uint64_t bits = f + r;
  return (bits + cfg.bdpu_width - 1) / cfg.bdpu_width;
}

std::uint64_t neuron_cycles_memo(std::size_t f, std::size_t r, bool hit,
                                 const HwConfig& cfg) {
  const std::uint64_t fmu = fmu_passes(f, r, cfg) * cfg.fmu_latency;
  const std::uint64_t full = hit ? 0 : neuron_cycles_full(f, r, cfg);
  if (cfg.fmu_overlap) {
    return hit ? fmu : std::max(fmu, full);
  }
  return fmu + full;
}

nlohmann::json HwCostReport::to_json() const {
  auto comp = [](const ComponentEnergy& e) {
    return nlohmann::json{{"scratchpad", e.scratchpad},
                          {"operations", e.operations},
                          {"dram", e.dram},
                          {"fmu", e.fmu},
                          {"total", e.total()}};
  };
  return {{"baseline_cycles", baseline_cycles},
          {"memo_cycles", memo_cycles},
          {"speedup", speedup},
          {"baseline_energy", comp(baseline_energy)},
          {"memo_energy", comp(memo_energy)},
          {"energy_savings_fraction", energy_savings_fraction},
          {"reuse_fraction", reuse_fraction},
          {"evaluations", evaluations},
          {"hits", hits}};
}

void HwCostReport::write_csv(std::ostream& os) const {
  os << "metric,baseline,memo\n";
  os << "cycles," << baseline_cycles << ',' << memo_cycles << "\n";
  os << "energy_scratchpad," << baseline_energy.scratchpad << ','
     << memo_energy.scratchpad << "\n";
  os << "energy_operations," << baseline_energy.operations << ','
     << memo_energy.operations << "\n";
  os << "energy_dram," << baseline_energy.dram << ',' << memo_energy.dram << "\n";
  os << "energy_fmu," << baseline_energy.fmu << ',' << memo_energy.fmu << "\n";
  os << "energy_total," << baseline_energy.total() << ',' << memo_energy.total() << "\n";
  os << "speedup," << speedup << ",\n";
  os << "energy_savings_fraction," << energy_savings_fraction << ",\n";
  os << "reuse_fraction," << reuse_fraction << ",\n";
}

HwCostReport aggregate(const ReuseTrace& trace, const HwConfig& cfg) {
  cfg.validate();
  trace.validate();
  const bool fmu_active = trace.policy != PolicyKind::Disabled;

  // Evaluation/hit counts per gate group; dims come from the trace's table.
  struct GroupCount {
    std::uint64_t evals = 0;
    std::uint64_t hits = 0;
  };
  std::map<const TraceGateInfo*, GroupCount> groups;
  for (const TraceRecord& r : trace.records) {
    const TraceGateInfo* g = trace.find_gate(r.layer, r.dir, r.gate);
    GroupCount& c = groups[g];
    ++c.evals;
    c.hits += r.hit;
  }

  HwCostReport rep;
  for (const auto& [g, count] : groups) {
    const std::size_t f = g->fan_in_forward;
    const std::size_t r = g->fan_in_recurrent;
    const std::uint64_t misses = count.evals - count.hits;
    rep.evaluations += count.evals;
    rep.hits += count.hits;

    rep.baseline_cycles += count.evals * neuron_cycles_full(f, r, cfg);
    if (fmu_active) {
      rep.memo_cycles += count.hits * neuron_cycles_memo(f, r, true, cfg) +
                         misses * neuron_cycles_memo(f, r, false, cfg);
    } else {
      rep.memo_cycles += count.evals * neuron_cycles_full(f, r, cfg);
    }

    const double fan_in = static_cast<double>(f + r);
    const double weight_bytes = fan_in * 4.0;
    const double input_bytes = fan_in * 4.0;

    // Baseline: every evaluation fetches weights/inputs and runs the DPU+MU.
    rep.baseline_energy.scratchpad +=
        count.evals * (weight_bytes * cfg.energy.weight_byte_read +
                       input_bytes * cfg.energy.input_byte_read);
    rep.baseline_energy.operations +=
        count.evals * (fan_in * cfg.energy.fp_mac + cfg.energy.mu_op);

    // Memoized: misses pay the full fetch/compute; the MU runs either way
    // (bias and activation are reapplied on hits); the FMU runs per
    // evaluation when a policy is active.
    rep.memo_energy.scratchpad +=
        static_cast<double>(misses) * (weight_bytes * cfg.energy.weight_byte_read +
                                       input_bytes * cfg.energy.input_byte_read);
    rep.memo_energy.operations += static_cast<double>(misses) * fan_in * cfg.energy.fp_mac +
                                  static_cast<double>(count.evals) * cfg.energy.mu_op;
    if (fmu_active) {
      const double passes = static_cast<double>(fmu_passes(f, r, cfg));
      rep.memo_energy.fmu +=
          static_cast<double>(count.evals) *
          (fan_in * cfg.energy.sign_bit_read + passes * cfg.energy.xnor_pop_pass +
           2.0 * cfg.energy.memo_buffer_access);
    }
  }

  // Weights stream from DRAM once per sequence regardless of the policy.
  double model_weight_bytes = 0.0;
  for (const TraceGateInfo& g : trace.gates) {
    model_weight_bytes += static_cast<double>(g.neurons) *
                          static_cast<double>(g.fan_in_forward + g.fan_in_recurrent) * 4.0;
  }
  const double dram_energy =
      model_weight_bytes * trace.sequences * cfg.energy.dram_byte;
  rep.baseline_energy.dram = dram_energy;
  rep.memo_energy.dram = dram_energy;

  // Leakage scales with how long each side runs.
  const double base_cycles = static_cast<double>(rep.baseline_cycles);
  const double memo_cycles = static_cast<double>(rep.memo_cycles);
  rep.baseline_energy.scratchpad += cfg.leakage.scratchpad * base_cycles;
  rep.baseline_energy.operations += cfg.leakage.operations * base_cycles;
  rep.baseline_energy.dram += cfg.leakage.dram * base_cycles;
  rep.memo_energy.scratchpad += cfg.leakage.scratchpad * memo_cycles;
  rep.memo_energy.operations += cfg.leakage.operations * memo_cycles;
  rep.memo_energy.dram += cfg.leakage.dram * memo_cycles;
  if (fmu_active) {
    rep.memo_energy.fmu += cfg.leakage.fmu * memo_cycles;
  }

  rep.reuse_fraction = trace.reuse_fraction();
  rep.speedup = rep.memo_cycles == 0
                    ? 1.0
                    : static_cast<double>(rep.baseline_cycles) /
                          static_cast<double>(rep.memo_cycles);
  const double base_total = rep.baseline_energy.total();
  rep.energy_savings_fraction =
      base_total == 0.0 ? 0.0 : 1.0 - rep.memo_energy.total() / base_total;
  return rep;
}

}  // namespace rnnmemo
