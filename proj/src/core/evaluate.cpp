#include "core/evaluate.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <future>

namespace rnnmemo {

namespace {

// Binarized gate mirrors per (layer, dir-instance), shared across sequences.
using CellBnn = std::vector<BinarizedGate>;

struct ModelBnn {
  std::vector<std::array<std::optional<CellBnn>, 2>> per_layer;
};

ModelBnn binarize_model(const RnnModel& model) {
  ModelBnn out;
  out.per_layer.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    out.per_layer[l][0] = binarize_cell(model.layers[l].forward_cell);
    if (model.layers[l].backward_cell) {
      out.per_layer[l][1] = binarize_cell(*model.layers[l].backward_cell);
    }
  }
  return out;
}

void fill_gate_infos(const RnnModel& model, ReuseTrace& trace) {
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& layer = model.layers[l];
    const std::size_t instances = layer.direction == Direction::Bidirectional ? 2 : 1;
    for (std::size_t d = 0; d < instances; ++d) {
      const CellParams& cell =
          d == 0 ? layer.forward_cell : *layer.backward_cell;
      const CellKind kind = cell_kind(cell);
      for (std::size_t g = 0; g < cell_gate_count(kind); ++g) {
        const GateParams& gate = cell_gate(cell, g);
        TraceGateInfo info;
        info.layer = static_cast<std::uint16_t>(l);
        info.dir = static_cast<std::uint8_t>(d);
        info.gate = static_cast<std::uint8_t>(g);
        info.gate_name = gate_name(kind, g);
        info.neurons = static_cast<std::uint32_t>(gate.neurons());
        info.fan_in_forward = static_cast<std::uint32_t>(gate.input_dim());
        info.fan_in_recurrent = static_cast<std::uint32_t>(gate.hidden_dim());
        trace.gates.push_back(std::move(info));
      }
    }
  }
}

struct PerSequenceOut {
  SequenceEval eval;
  ReuseTrace trace;
};

PerSequenceOut run_one(const RnnModel& model, const ModelBnn& bnn, const Sequence& seq,
                       std::uint32_t seq_index, const MemoPolicy& policy) {
  PerSequenceOut out;
  out.trace.policy = policy.kind;
  out.trace.theta = policy.theta;
  out.trace.throttle = policy.throttle;
  out.trace.sequences = 1;

  HookFactory factory = [&](std::size_t layer, std::size_t dir_instance,
                            const CellParams& cell) -> std::unique_ptr<NeuronHook> {
    auto table = std::make_shared<MemoTable>(make_memo_table(cell));
    const CellBnn* gates = nullptr;
    if (policy.kind == PolicyKind::Bnn) {
      gates = &*bnn.per_layer[layer][dir_instance];
    }
    // Wrapper keeps the per-instance table alive for the hook's lifetime.
    struct OwningHook final : NeuronHook {
      std::shared_ptr<MemoTable> table;
      MemoHook inner;
      OwningHook(std::shared_ptr<MemoTable> t, const CellBnn* g, const MemoPolicy& p,
                 ReuseTrace* tr, std::uint32_t s, std::uint16_t l, std::uint8_t d)
          : table(std::move(t)), inner(*table, g, p, tr, s, l, d) {}
      void begin_step(std::size_t t) override { inner.begin_step(t); }
      float pre_activation(const GateSite& site, const ExactPreactivation& exact) override {
        return inner.pre_activation(site, exact);
      }
    };
    return std::make_unique<OwningHook>(table, gates, policy, &out.trace, seq_index,
                                        static_cast<std::uint16_t>(layer),
                                        static_cast<std::uint8_t>(dir_instance));
  };

  const std::vector<Vec> inputs = seq.as_vectors();
  out.eval.outputs = run_sequence(model, inputs, factory);
  out.eval.steps = seq.steps;
  out.eval.reuse = out.trace.reuse_fraction();
  if (model.readout) {
    out.eval.prediction = apply_readout(model, out.eval.outputs.back());
  }
  return out;
}

}  // namespace

AccuracyMetric compute_metric(const Dataset& ds, const std::vector<std::size_t>& indices,
                              const std::vector<SequenceEval>& evals) {
  const MetricKind kind = ds.metric_kind();
  if (indices.size() != evals.size() || evals.empty()) {
    throw ValidationError("compute_metric: no evaluations");
  }
  if (kind == MetricKind::Mse) {
    double sum = 0.0;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      if (evals[i].prediction.empty()) throw ValidationError("metric: missing prediction");
      const double err =
          static_cast<double>(evals[i].prediction[0]) - *ds.sequences[indices[i]].label;
      sum += err * err;
    }
    return {MetricKind::Mse, sum / static_cast<double>(evals.size())};
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    const Vec& logits = evals[i].prediction;
    if (logits.empty()) throw ValidationError("metric: missing prediction");
    const std::size_t argmax = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (argmax == static_cast<std::size_t>(*ds.sequences[indices[i]].label)) ++correct;
  }
  return {MetricKind::Accuracy,
          static_cast<double>(correct) / static_cast<double>(evals.size())};
}

EvalResult evaluate(const RnnModel& model, const Dataset& ds, const std::string& split,
                    const MemoPolicy& policy, int threads) {
  model.validate();
  ds.validate();
  policy.validate();
  if (ds.sequences.front().dim != model.input_dim) {
    throw DimensionError("evaluate: dataset feature dim does not match model input dim");
  }
  const std::vector<std::size_t> indices = ds.split_indices(split);

  const ModelBnn bnn = policy.kind == PolicyKind::Bnn ? binarize_model(model) : ModelBnn{};

  std::vector<PerSequenceOut> outs(indices.size());
  const int workers = std::max(1, threads);
  if (workers == 1) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
      outs[i] = run_one(model, bnn, ds.sequences[indices[i]],
                        static_cast<std::uint32_t>(i), policy);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= indices.size()) return;
        outs[i] = run_one(model, bnn, ds.sequences[indices[i]],
                          static_cast<std::uint32_t>(i), policy);
      }
    };
    std::vector<std::future<void>> futs;
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futs) f.get();
  }

  EvalResult result;
  result.trace.policy = policy.kind;
  result.trace.theta = policy.theta;
  result.trace.throttle = policy.throttle;
  fill_gate_infos(model, result.trace);
  for (PerSequenceOut& o : outs) {
    result.sequences.push_back(std::move(o.eval));
    result.trace.append(o.trace);
  }
  if (model.readout && ds.labeled() && ds.kind != "none") {
    result.metric = compute_metric(ds, indices, result.sequences);
  }
  return result;
}

}  // namespace rnnmemo
