#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "core/bnn.hpp"
#include "core/policy.hpp"
#include "core/rnn.hpp"
#include "core/trace.hpp"

namespace rnnmemo {

// Relative difference |current - cached| / |current|, with the denominator
// taken from the CURRENT value. Zero-denominator rule: 0/0 -> 0 (no change),
// x/0 -> +inf so the step is forced to recompute.
inline double relative_error(double current, double cached) {
  if (current == 0.0) {
    return cached == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(current - cached) / std::abs(current);
}

// Per-neuron memo record: cached full-precision pre-activation, cached BNN
// output, and the accumulated relative BNN difference since the last miss.
template <class Real>
struct BasicMemoState {
  Real y_m{};
  long long y_m_b = 0;
  double delta = 0.0;
  bool valid = false;

  void reset() {
    y_m = Real{};
    y_m_b = 0;
    delta = 0.0;
    valid = false;
  }
};

using MemoState = BasicMemoState<float>;

// BNN-predicted step. y_t_b is the live BNN output; `recompute` performs the
// full-precision evaluation and is invoked only on a miss. Returns the
// pre-activation to use and whether it was served from the table.
template <class Real, class Recompute>
std::pair<Real, bool> bnn_memo_step(BasicMemoState<Real>& st, long long y_t_b,
                                    const MemoPolicy& policy, Recompute&& recompute) {
  if (st.valid) {
    const double eps =
        relative_error(static_cast<double>(y_t_b), static_cast<double>(st.y_m_b));
    const double cand = policy.throttle ? st.delta + eps : eps;
    if (cand <= policy.theta) {
      st.delta = cand;
      return {st.y_m, true};
    }
  }
  const Real y = recompute();
  st.y_m = y;
  st.y_m_b = y_t_b;
  st.delta = 0.0;
  st.valid = true;
  return {y, false};
}

// Oracle step: the true value is always available; a "hit" means the stale
// cached value would have been reused, and that stale value is returned so
// the approximation propagates downstream. delta here is the per-step
// relative difference (the oracle has no throttling accumulator).
template <class Real>
std::pair<Real, bool> oracle_memo_step(BasicMemoState<Real>& st, Real y_exact,
                                       const MemoPolicy& policy) {
  if (st.valid) {
    const double delta = relative_error(static_cast<double>(y_exact),
                                        static_cast<double>(st.y_m));
    if (delta <= policy.theta) {
      st.delta = delta;
      return {st.y_m, true};
    }
  }
  st.y_m = y_exact;
  st.delta = 0.0;
  st.valid = true;
  return {y_exact, false};
}

// Memo records for every (gate, neuron) of one cell instance.
class MemoTable {
 public:
  MemoTable() = default;
  MemoTable(std::size_t gate_count, std::size_t neurons)
      : gates_(gate_count), neurons_(neurons), states_(gate_count * neurons) {}

  MemoState& at(std::size_t gate, std::size_t neuron) {
    return states_[gate * neurons_ + neuron];
  }
  std::size_t gate_count() const { return gates_; }
  std::size_t neurons() const { return neurons_; }

  void reset() {
    for (MemoState& s : states_) s.reset();
  }

 private:
  std::size_t gates_ = 0;
  std::size_t neurons_ = 0;
  std::vector<MemoState> states_;
};

MemoTable make_memo_table(const CellParams& cell);
std::vector<BinarizedGate> binarize_cell(const CellParams& cell);

// Hook implementing the memoization policies on top of the table. Trace
// recording is optional; the (sequence, layer, dir) coordinates tag the
// emitted records.
class MemoHook final : public NeuronHook {
 public:
  MemoHook(MemoTable& table, const std::vector<BinarizedGate>* bnn_gates,
           MemoPolicy policy, ReuseTrace* trace, std::uint32_t sequence,
           std::uint16_t layer, std::uint8_t dir);

  void begin_step(std::size_t timestep) override;
  float pre_activation(const GateSite& site, const ExactPreactivation& exact) override;

 private:
  const BitVector& binarized_input(const GateSite& site);

  MemoTable& table_;
  const std::vector<BinarizedGate>* bnn_gates_;
  MemoPolicy policy_;
  ReuseTrace* trace_;
  std::uint32_t sequence_;
  std::uint16_t layer_;
  std::uint8_t dir_;
  std::uint32_t timestep_ = 0;

  // The gate inputs are shared by all neurons of a gate within a step, so the
  // packed signs are computed once per (gate, step).
  struct CachedInput {
    BitVector bits;
    std::uint64_t stamp = 0;
  };
  std::vector<CachedInput> input_cache_;
  std::uint64_t step_stamp_ = 0;
};

std::unique_ptr<NeuronHook> make_hook(MemoTable& table,
                                      const std::vector<BinarizedGate>* bnn_gates,
                                      const MemoPolicy& policy, ReuseTrace* trace,
                                      std::uint32_t sequence, std::uint16_t layer,
                                      std::uint8_t dir);

}  // namespace rnnmemo
