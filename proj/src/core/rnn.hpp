#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "core/tensor.hpp"

namespace rnnmemo {

enum class CellKind { Lstm, Gru };
enum class Direction { Forward, Backward, Bidirectional };

const char* cell_kind_name(CellKind k);
const char* direction_name(Direction d);

// One fully connected gate: pre-activation of neuron n is
//   dot(w_forward.row(n), x) + dot(w_recurrent.row(n), h_prev)
// Bias (and the optional peephole term) are applied by the cell afterwards.
struct GateParams {
  Matrix w_forward;    // neurons x input_dim
  Matrix w_recurrent;  // neurons x hidden_dim
  Vec bias;            // neurons
  std::optional<Vec> peephole;

  std::size_t neurons() const { return bias.size(); }
  std::size_t input_dim() const { return w_forward.cols; }
  std::size_t hidden_dim() const { return w_recurrent.cols; }
  void validate() const;
};

struct LstmCellParams {
  GateParams input_gate;   // i
  GateParams forget_gate;  // f
  GateParams update_gate;  // g (candidate)
  GateParams output_gate;  // o

  static constexpr std::array<const char*, 4> kGateNames = {"i", "f", "g", "o"};
  std::size_t neurons() const { return input_gate.neurons(); }
  std::size_t input_dim() const { return input_gate.input_dim(); }
  const GateParams& gate(std::size_t idx) const;
  GateParams& gate(std::size_t idx);
  void validate() const;
};

struct GruCellParams {
  GateParams update_gate;     // z
  GateParams reset_gate;      // r
  GateParams candidate_gate;  // g

  static constexpr std::array<const char*, 3> kGateNames = {"z", "r", "g"};
  std::size_t neurons() const { return update_gate.neurons(); }
  std::size_t input_dim() const { return update_gate.input_dim(); }
  const GateParams& gate(std::size_t idx) const;
  GateParams& gate(std::size_t idx);
  void validate() const;
};

using CellParams = std::variant<LstmCellParams, GruCellParams>;

CellKind cell_kind(const CellParams& cell);
std::size_t cell_neurons(const CellParams& cell);
std::size_t cell_input_dim(const CellParams& cell);
std::size_t cell_gate_count(CellKind kind);
const char* gate_name(CellKind kind, std::size_t gate_index);
const GateParams& cell_gate(const CellParams& cell, std::size_t gate_index);
void validate_cell(const CellParams& cell);

struct CellState {
  Vec h;
  std::optional<Vec> c;  // present iff the cell is an LSTM

  static CellState initial(CellKind kind, std::size_t neurons);
};

struct LayerSpec {
  Direction direction = Direction::Forward;
  CellParams forward_cell;
  // Independent parameter set for the reverse pass of a bidirectional layer.
  std::optional<CellParams> backward_cell;

  CellKind kind() const { return cell_kind(forward_cell); }
  std::size_t input_dim() const { return cell_input_dim(forward_cell); }
  std::size_t hidden_dim() const { return cell_neurons(forward_cell); }
  std::size_t output_dim() const {
    return direction == Direction::Bidirectional ? 2 * hidden_dim() : hidden_dim();
  }
  void validate() const;
};

// Optional task head: prediction = w * h_last + bias.
struct Readout {
  Matrix w;
  Vec bias;
};

struct RnnModel {
  std::string name = "model";
  int format_version = 1;
  std::size_t input_dim = 0;
  std::vector<LayerSpec> layers;
  std::optional<Readout> readout;

  std::size_t output_dim() const;
  void validate() const;
};

// Identifies one neuron evaluation inside a gate. x and h are the live gate
// inputs for the current timestep (for a GRU candidate gate, h is the
// reset-scaled recurrent vector actually consumed by the gate).
struct GateSite {
  std::size_t gate = 0;
  std::size_t neuron = 0;
  std::span<const float> x;
  std::span<const float> h;
};

// Deferred full-precision pre-activation (the two dot products). Invoked only
// when the hook decides the neuron must really be evaluated.
struct ExactPreactivation {
  const GateParams* gate = nullptr;
  std::size_t neuron = 0;
  std::span<const float> x;
  std::span<const float> h;

  float operator()() const {
    return dot(gate->w_forward.row(neuron), x) + dot(gate->w_recurrent.row(neuron), h);
  }
};

// Per-neuron interception point. The returned value replaces the neuron's
// raw pre-activation; bias, peephole and activation are always recomputed by
// the caller on top of it.
class NeuronHook {
 public:
  virtual ~NeuronHook() = default;
  virtual void begin_step(std::size_t timestep) { (void)timestep; }
  virtual float pre_activation(const GateSite& site, const ExactPreactivation& exact) = 0;
};

// Always evaluates in full precision.
class IdentityHook final : public NeuronHook {
 public:
  float pre_activation(const GateSite&, const ExactPreactivation& exact) override {
    return exact();
  }
};

// Raw pre-activation vector for one gate; the hook may substitute entries.
Vec eval_gate(const GateParams& gate, std::span<const float> x,
              std::span<const float> h_prev, std::size_t gate_index, NeuronHook& hook);

CellState lstm_step(const LstmCellParams& cell, std::span<const float> x,
                    const CellState& prev, NeuronHook& hook);
CellState gru_step(const GruCellParams& cell, std::span<const float> x,
                   const CellState& prev, NeuronHook& hook);
CellState cell_step(const CellParams& cell, std::span<const float> x,
                    const CellState& prev, NeuronHook& hook);

// Fresh hook per (layer, direction-instance); dir_instance is 0 for the
// forward pass and 1 for the reverse pass of a bidirectional layer.
using HookFactory = std::function<std::unique_ptr<NeuronHook>(
    std::size_t layer, std::size_t dir_instance, const CellParams& cell)>;

// Top-layer h_t per timestep; bidirectional layers concatenate forward and
// backward outputs. h_0 and c_0 are zero.
std::vector<Vec> run_sequence(const RnnModel& model, const std::vector<Vec>& inputs,
                              const HookFactory& hook_factory);
std::vector<Vec> run_sequence(const RnnModel& model, const std::vector<Vec>& inputs);

Vec apply_readout(const RnnModel& model, const Vec& last_output);

}  // namespace rnnmemo
