#include "core/memo.hpp"

namespace rnnmemo {

MemoTable make_memo_table(const CellParams& cell) {
  return MemoTable(cell_gate_count(cell_kind(cell)), cell_neurons(cell));
}

std::vector<BinarizedGate> binarize_cell(const CellParams& cell) {
  const std::size_t gates = cell_gate_count(cell_kind(cell));
  std::vector<BinarizedGate> out;
  out.reserve(gates);
  for (std::size_t g = 0; g < gates; ++g) {
    out.push_back(binarize_gate(cell_gate(cell, g)));
  }
  return out;
}

MemoHook::MemoHook(MemoTable& table, const std::vector<BinarizedGate>* bnn_gates,
                   MemoPolicy policy, ReuseTrace* trace, std::uint32_t sequence,
                   std::uint16_t layer, std::uint8_t dir)
    : table_(table),
      bnn_gates_(bnn_gates),
      policy_(policy),
      trace_(trace),
      sequence_(sequence),
      layer_(layer),
      dir_(dir),
      input_cache_(table.gate_count()) {
  if (policy_.kind == PolicyKind::Bnn && !bnn_gates_) {
    throw ValidationError("memo hook: BNN policy requires binarized gates");
  }
}

void MemoHook::begin_step(std::size_t timestep) {
  timestep_ = static_cast<std::uint32_t>(timestep);
  ++step_stamp_;
}

const BitVector& MemoHook::binarized_input(const GateSite& site) {
  CachedInput& slot = input_cache_[site.gate];
  if (slot.stamp != step_stamp_) {
    slot.bits = binarize_concat<float>(site.x, site.h);
    slot.stamp = step_stamp_;
  }
  return slot.bits;
}

float MemoHook::pre_activation(const GateSite& site, const ExactPreactivation& exact) {
  float value = 0.0f;
  bool hit = false;
  switch (policy_.kind) {
    case PolicyKind::Disabled: {
      value = exact();
      break;
    }
    case PolicyKind::Oracle: {
      MemoState& st = table_.at(site.gate, site.neuron);
      auto [y, h] = oracle_memo_step(st, exact(), policy_);
      value = y;
      hit = h;
      break;
    }
    case PolicyKind::Bnn: {
      MemoState& st = table_.at(site.gate, site.neuron);
      const BinarizedGate& bgate = (*bnn_gates_)[site.gate];
      const long long y_b = binary_dot(bgate.rows[site.neuron], binarized_input(site));
      auto [y, h] = bnn_memo_step(st, y_b, policy_, exact);
      value = y;
      hit = h;
      break;
    }
  }
  if (trace_) {
    trace_->add(TraceRecord{sequence_, timestep_, layer_, dir_,
                            static_cast<std::uint8_t>(site.gate),
                            static_cast<std::uint32_t>(site.neuron),
                            static_cast<std::uint8_t>(hit)});
  }
  return value;
}

std::unique_ptr<NeuronHook> make_hook(MemoTable& table,
                                      const std::vector<BinarizedGate>* bnn_gates,
                                      const MemoPolicy& policy, ReuseTrace* trace,
                                      std::uint32_t sequence, std::uint16_t layer,
                                      std::uint8_t dir) {
  return std::make_unique<MemoHook>(table, bnn_gates, policy, trace, sequence, layer, dir);
}

}  // namespace rnnmemo
