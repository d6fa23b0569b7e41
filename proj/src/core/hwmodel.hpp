#pragma once

#include <cstdint>
#include <iosfwd>

#include "core/trace.hpp"

#include "json.hpp"

namespace rnnmemo {

// Dynamic energy per event, in arbitrary units. The shipped defaults are
// placeholders calibrated so the component breakdown has weight fetch
// dominating the baseline; they are configuration, not measured silicon.
struct EnergyEvents {
  double fp_mac = 1.0;
  double weight_byte_read = 1.0;
  double input_byte_read = 0.25;
  double sign_bit_read = 0.03;
  double xnor_pop_pass = 10.0;
  double memo_buffer_access = 4.0;
  double mu_op = 2.0;
  double dram_byte = 20.0;
};

// Static (leakage) energy per cycle per component.
struct StaticRates {
  double scratchpad = 2.0;
  double operations = 1.0;
  double dram = 0.5;
  double fmu = 0.2;
};

struct HwConfig {
  unsigned dpu_width = 16;     // fp MACs per cycle
  unsigned bdpu_width = 2048;  // bits per FMU pass
  unsigned fmu_latency = 5;    // cycles per FMU pass
  // When true the FMU pass is assumed hidden behind the previous neuron's
  // dot product instead of charged serially.
  bool fmu_overlap = false;
  EnergyEvents energy;
  StaticRates leakage;

  void validate() const;
  nlohmann::json to_json() const;
  static HwConfig from_json(const nlohmann::json& j);
};

std::uint64_t neuron_cycles_full(std::size_t fan_in_forward, std::size_t fan_in_recurrent,
                                 const HwConfig& cfg);
std::uint64_t fmu_passes(std::size_t fan_in_forward, std::size_t fan_in_recurrent,
                         const HwConfig& cfg);
std::uint64_t neuron_cycles_memo(std::size_t fan_in_forward, std::size_t fan_in_recurrent,
                                 bool hit, const HwConfig& cfg);

struct ComponentEnergy {
  double scratchpad = 0.0;
  double operations = 0.0;
  double dram = 0.0;
  double fmu = 0.0;

  double total() const { return scratchpad + operations + dram + fmu; }
};

struct HwCostReport {
  std::uint64_t baseline_cycles = 0;
  std::uint64_t memo_cycles = 0;
  double speedup = 1.0;
  ComponentEnergy baseline_energy;
  ComponentEnergy memo_energy;
  double energy_savings_fraction = 0.0;
  double reuse_fraction = 0.0;
  std::uint64_t evaluations = 0;
  std::uint64_t hits = 0;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& os) const;
};

// Converts a hit/miss trace plus model dimensions into modeled cycles and
// energy for the plain accelerator and for the memoized one.
HwCostReport aggregate(const ReuseTrace& trace, const HwConfig& cfg);

}  // namespace rnnmemo
