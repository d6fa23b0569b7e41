#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/policy.hpp"

#include "json.hpp"

namespace rnnmemo {

// One neuron evaluation site. dir: 0 = forward pass, 1 = backward pass.
struct TraceRecord {
  std::uint32_t sequence = 0;
  std::uint32_t timestep = 0;
  std::uint16_t layer = 0;
  std::uint8_t dir = 0;
  std::uint8_t gate = 0;
  std::uint32_t neuron = 0;
  std::uint8_t hit = 0;
};

// Dimensions of one gate group, needed by the hardware model: F forward
// fan-in, R recurrent fan-in, per-gate neuron count.
struct TraceGateInfo {
  std::uint16_t layer = 0;
  std::uint8_t dir = 0;
  std::uint8_t gate = 0;
  std::string gate_name;
  std::uint32_t neurons = 0;
  std::uint32_t fan_in_forward = 0;    // F
  std::uint32_t fan_in_recurrent = 0;  // R
};

// Per-timestep, per-neuron hit/miss log for a batch of sequences, plus the
// model dimensions required to cost it.
class ReuseTrace {
 public:
  PolicyKind policy = PolicyKind::Disabled;
  double theta = 0.0;
  bool throttle = true;
  std::uint32_t sequences = 0;

  std::vector<TraceGateInfo> gates;
  std::vector<TraceRecord> records;

  void add(const TraceRecord& r) { records.push_back(r); }
  void append(const ReuseTrace& other);

  std::uint64_t evaluations() const { return records.size(); }
  std::uint64_t hits() const;
  double reuse_fraction() const;

  const TraceGateInfo* find_gate(std::uint16_t layer, std::uint8_t dir,
                                 std::uint8_t gate) const;
  // Throws ValidationError when records reference unknown gates/neurons.
  void validate() const;

  void write_csv(std::ostream& os) const;
  static ReuseTrace read_csv(std::istream& is);

  nlohmann::json to_json() const;
};

}  // namespace rnnmemo
