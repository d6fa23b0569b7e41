#include "core/rnn.hpp"

#include <utility>

namespace rnnmemo {

const char* cell_kind_name(CellKind k) {
  return k == CellKind::Lstm ? "lstm" : "gru";
}

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::Forward: return "forward";
    case Direction::Backward: return "backward";
    case Direction::Bidirectional: return "bidirectional";
  }
  return "?";
}

void GateParams::validate() const {
  if (neurons() == 0 || input_dim() == 0 || hidden_dim() == 0) {
    throw ValidationError("gate: empty dimensions");
  }
  if (w_forward.rows != neurons() || w_recurrent.rows != neurons()) {
    throw ValidationError("gate: weight row count does not match bias length");
  }
  if (w_forward.data.size() != w_forward.rows * w_forward.cols ||
      w_recurrent.data.size() != w_recurrent.rows * w_recurrent.cols) {
    throw ValidationError("gate: weight storage size mismatch");
  }
  if (peephole && peephole->size() != neurons()) {
    throw ValidationError("gate: peephole length does not match neuron count");
  }
}

const GateParams& LstmCellParams::gate(std::size_t idx) const {
  switch (idx) {
    case 0: return input_gate;
    case 1: return forget_gate;
    case 2: return update_gate;
    case 3: return output_gate;
  }
  throw std::out_of_range("lstm gate index");
}

GateParams& LstmCellParams::gate(std::size_t idx) {
  return const_cast<GateParams&>(std::as_const(*this).gate(idx));
}

void LstmCellParams::validate() const {
  for (std::size_t g = 0; g < 4; ++g) {
    gate(g).validate();
    if (gate(g).neurons() != neurons() || gate(g).input_dim() != input_dim() ||
        gate(g).hidden_dim() != neurons()) {
      throw ValidationError("lstm cell: gates disagree on dimensions");
    }
  }
}

const GateParams& GruCellParams::gate(std::size_t idx) const {
  switch (idx) {
    case 0: return update_gate;
    case 1: return reset_gate;
    case 2: return candidate_gate;
  }
  throw std::out_of_range("gru gate index");
}

GateParams& GruCellParams::gate(std::size_t idx) {
  return const_cast<GateParams&>(std::as_const(*this).gate(idx));
}

void GruCellParams::validate() const {
  for (std::size_t g = 0; g < 3; ++g) {
    gate(g).validate();
    if (gate(g).neurons() != neurons() || gate(g).input_dim() != input_dim() ||
        gate(g).hidden_dim() != neurons()) {
      throw ValidationError("gru cell: gates disagree on dimensions");
    }
    if (gate(g).peephole) {
      throw ValidationError("gru cell: peephole connections are not defined");
    }
  }
}

CellKind cell_kind(const CellParams& cell) {
  return std::holds_alternative<LstmCellParams>(cell) ? CellKind::Lstm : CellKind::Gru;
}

std::size_t cell_neurons(const CellParams& cell) {
  return std::visit([](const auto& c) { return c.neurons(); }, cell);
}

std::size_t cell_input_dim(const CellParams& cell) {
  return std::visit([](const auto& c) { return c.input_dim(); }, cell);
}

std::size_t cell_gate_count(CellKind kind) {
  return kind == CellKind::Lstm ? 4 : 3;
}

const char* gate_name(CellKind kind, std::size_t gate_index) {
  if (kind == CellKind::Lstm) return LstmCellParams::kGateNames.at(gate_index);
  return GruCellParams::kGateNames.at(gate_index);
}

const GateParams& cell_gate(const CellParams& cell, std::size_t gate_index) {
  return std::visit(
      [gate_index](const auto& c) -> const GateParams& { return c.gate(gate_index); }, cell);
}

void validate_cell(const CellParams& cell) {
  std::visit([](const auto& c) { c.validate(); }, cell);
}

CellState CellState::initial(CellKind kind, std::size_t neurons) {
  CellState s;
  s.h.assign(neurons, 0.0f);
  if (kind == CellKind::Lstm) s.c = Vec(neurons, 0.0f);
  return s;
}

void LayerSpec::validate() const {
  validate_cell(forward_cell);
  if (direction == Direction::Bidirectional) {
    if (!backward_cell) {
      throw ValidationError("bidirectional layer is missing the backward parameter set");
    }
    validate_cell(*backward_cell);
    if (cell_kind(*backward_cell) != kind() ||
        cell_neurons(*backward_cell) != hidden_dim() ||
        cell_input_dim(*backward_cell) != input_dim()) {
      throw ValidationError("bidirectional layer: forward/backward cells disagree");
    }
  } else if (backward_cell) {
    throw ValidationError("unidirectional layer carries a backward parameter set");
  }
}

std::size_t RnnModel::output_dim() const {
  return layers.empty() ? input_dim : layers.back().output_dim();
}

void RnnModel::validate() const {
  if (input_dim == 0) throw ValidationError("model: input_dim must be >= 1");
  if (layers.empty()) throw ValidationError("model: no layers");
  std::size_t dim = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].validate();
    if (layers[i].input_dim() != dim) {
      throw ValidationError("model: layer " + std::to_string(i) +
                            " input dim does not match previous layer output");
    }
    dim = layers[i].output_dim();
  }
  if (readout) {
    if (readout->w.cols != dim || readout->w.rows != readout->bias.size() ||
        readout->w.rows == 0) {
      throw ValidationError("model: readout dims do not match top layer output");
    }
  }
}

Vec eval_gate(const GateParams& gate, std::span<const float> x,
              std::span<const float> h_prev, std::size_t gate_index, NeuronHook& hook) {
  if (x.size() != gate.input_dim() || h_prev.size() != gate.hidden_dim()) {
    throw DimensionError("eval_gate: input dims do not match gate");
  }
  Vec out(gate.neurons());
  for (std::size_t n = 0; n < gate.neurons(); ++n) {
    const GateSite site{gate_index, n, x, h_prev};
    const ExactPreactivation exact{&gate, n, x, h_prev};
    out[n] = hook.pre_activation(site, exact);
  }
  return out;
}

CellState lstm_step(const LstmCellParams& cell, std::span<const float> x,
                    const CellState& prev, NeuronHook& hook) {
  const std::size_t n = cell.neurons();
  if (prev.h.size() != n || !prev.c || prev.c->size() != n) {
    throw DimensionError("lstm_step: state dims do not match cell");
  }
  const Vec& c_prev = *prev.c;

  Vec a_i = eval_gate(cell.input_gate, x, prev.h, 0, hook);
  Vec a_f = eval_gate(cell.forget_gate, x, prev.h, 1, hook);
  Vec a_g = eval_gate(cell.update_gate, x, prev.h, 2, hook);
  Vec a_o = eval_gate(cell.output_gate, x, prev.h, 3, hook);

  CellState next;
  next.h.resize(n);
  next.c = Vec(n);
  for (std::size_t k = 0; k < n; ++k) {
    float pre_i = a_i[k] + cell.input_gate.bias[k];
    float pre_f = a_f[k] + cell.forget_gate.bias[k];
    if (cell.input_gate.peephole) pre_i += (*cell.input_gate.peephole)[k] * c_prev[k];
    if (cell.forget_gate.peephole) pre_f += (*cell.forget_gate.peephole)[k] * c_prev[k];
    const float i = sigmoid(pre_i);
    const float f = sigmoid(pre_f);
    const float g = tanh_act(a_g[k] + cell.update_gate.bias[k]);
    const float c = f * c_prev[k] + i * g;
    float pre_o = a_o[k] + cell.output_gate.bias[k];
    // Output-gate peephole reads the freshly updated cell state.
    if (cell.output_gate.peephole) pre_o += (*cell.output_gate.peephole)[k] * c;
    const float o = sigmoid(pre_o);
    (*next.c)[k] = c;
    next.h[k] = o * tanh_act(c);
  }
  return next;
}

CellState gru_step(const GruCellParams& cell, std::span<const float> x,
                   const CellState& prev, NeuronHook& hook) {
  const std::size_t n = cell.neurons();
  if (prev.h.size() != n || prev.c) {
    throw DimensionError("gru_step: state dims do not match cell");
  }

  Vec a_z = eval_gate(cell.update_gate, x, prev.h, 0, hook);
  Vec a_r = eval_gate(cell.reset_gate, x, prev.h, 1, hook);

  Vec z(n), r(n), hr(n);
  for (std::size_t k = 0; k < n; ++k) {
    z[k] = sigmoid(a_z[k] + cell.update_gate.bias[k]);
    r[k] = sigmoid(a_r[k] + cell.reset_gate.bias[k]);
    hr[k] = r[k] * prev.h[k];
  }

  // The candidate gate consumes the reset-scaled recurrent vector, so its
  // hook sees the full pre-activation including that term.
  Vec a_g = eval_gate(cell.candidate_gate, x, hr, 2, hook);

  CellState next;
  next.h.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const float g = tanh_act(a_g[k] + cell.candidate_gate.bias[k]);
    next.h[k] = (1.0f - z[k]) * prev.h[k] + z[k] * g;
  }
  return next;
}

CellState cell_step(const CellParams& cell, std::span<const float> x,
                    const CellState& prev, NeuronHook& hook) {
  if (const auto* lstm = std::get_if<LstmCellParams>(&cell)) {
    return lstm_step(*lstm, x, prev, hook);
  }
  return gru_step(std::get<GruCellParams>(cell), x, prev, hook);
}

namespace {

std::vector<Vec> run_direction(const CellParams& cell, const std::vector<Vec>& inputs,
                               bool backward, NeuronHook& hook) {
  const std::size_t steps = inputs.size();
  std::vector<Vec> out(steps);
  CellState state = CellState::initial(cell_kind(cell), cell_neurons(cell));
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = backward ? steps - 1 - k : k;
    hook.begin_step(t);
    state = cell_step(cell, inputs[t], state, hook);
    out[t] = state.h;
  }
  return out;
}

}  // namespace

std::vector<Vec> run_sequence(const RnnModel& model, const std::vector<Vec>& inputs,
                              const HookFactory& hook_factory) {
  if (inputs.empty()) throw ValidationError("run_sequence: empty input sequence");
  for (const Vec& x : inputs) {
    if (x.size() != model.input_dim) {
      throw DimensionError("run_sequence: input dim does not match model");
    }
  }

  auto make_hook = [&](std::size_t layer, std::size_t dir_instance,
                       const CellParams& cell) -> std::unique_ptr<NeuronHook> {
    if (hook_factory) return hook_factory(layer, dir_instance, cell);
    return std::make_unique<IdentityHook>();
  };

  std::vector<Vec> current = inputs;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& layer = model.layers[l];
    if (cell_input_dim(layer.forward_cell) != current.front().size()) {
      throw DimensionError("run_sequence: layer input dim mismatch");
    }
    switch (layer.direction) {
      case Direction::Forward: {
        auto hook = make_hook(l, 0, layer.forward_cell);
        current = run_direction(layer.forward_cell, current, false, *hook);
        break;
      }
      case Direction::Backward: {
        auto hook = make_hook(l, 0, layer.forward_cell);
        current = run_direction(layer.forward_cell, current, true, *hook);
        break;
      }
      case Direction::Bidirectional: {
        auto fwd_hook = make_hook(l, 0, layer.forward_cell);
        auto bwd_hook = make_hook(l, 1, *layer.backward_cell);
        std::vector<Vec> fwd = run_direction(layer.forward_cell, current, false, *fwd_hook);
        std::vector<Vec> bwd = run_direction(*layer.backward_cell, current, true, *bwd_hook);
        std::vector<Vec> merged(current.size());
        for (std::size_t t = 0; t < current.size(); ++t) {
          merged[t].reserve(fwd[t].size() + bwd[t].size());
          merged[t].insert(merged[t].end(), fwd[t].begin(), fwd[t].end());
          merged[t].insert(merged[t].end(), bwd[t].begin(), bwd[t].end());
        }
        current = std::move(merged);
        break;
      }
    }
  }
  return current;
}

std::vector<Vec> run_sequence(const RnnModel& model, const std::vector<Vec>& inputs) {
  return run_sequence(model, inputs, HookFactory{});
}

Vec apply_readout(const RnnModel& model, const Vec& last_output) {
  if (!model.readout) throw ValidationError("model has no readout head");
  Vec out = matvec(model.readout->w, last_output);
  add_inplace(out, model.readout->bias);
  return out;
}

}  // namespace rnnmemo
