#include "core/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rnnmemo {

namespace {

double sigmoid_d(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot_d(const double* a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::span<const double> row(const MatrixD& m, std::size_t r) {
  return std::span<const double>(m.data).subspan(r * m.cols, m.cols);
}

// Sign mirror of the double-precision gates.
std::vector<BinarizedGate> binarize_train_model(const TrainModel& m) {
  std::vector<BinarizedGate> out(m.gates.size());
  for (std::size_t g = 0; g < m.gates.size(); ++g) {
    out[g].rows.reserve(m.hidden);
    for (std::size_t n = 0; n < m.hidden; ++n) {
      out[g].rows.push_back(
          binarize_concat<double>(row(m.gates[g].w_forward, n), row(m.gates[g].w_recurrent, n)));
    }
  }
  return out;
}

struct StepTape {
  VecD x;
  VecD h_prev;
  VecD c_prev;                           // LSTM only
  std::vector<VecD> preact;              // per gate, post-memo dot sums
  std::vector<std::vector<std::uint8_t>> hit;  // per gate per neuron
  VecD ga, gb, gc, gd;  // LSTM: i,f,g,o ; GRU: z,r,g,hr
  VecD c;               // LSTM only
  VecD h;
};

struct ForwardState {
  std::vector<StepTape> steps;
  VecD h_last;
};

// One gate's pre-activations under the memo policy. memo may be null
// (disabled); bits caches the packed input signs for this gate evaluation.
VecD gate_preact(const TrainGate& gate, const VecD& x, const VecD& h_input,
                 const MemoPolicy& policy,
                 std::vector<BasicMemoState<double>>* memo, const BinarizedGate* bgate,
                 std::vector<std::uint8_t>* hits) {
  const std::size_t n = gate.bias.size();
  VecD out(n);
  hits->assign(n, 0);
  if (policy.kind != PolicyKind::Bnn || !memo) {
    for (std::size_t k = 0; k < n; ++k) {
      out[k] = dot_d(row(gate.w_forward, k).data(), x) +
               dot_d(row(gate.w_recurrent, k).data(), h_input);
    }
    return out;
  }
  const BitVector input = binarize_concat<double>(std::span<const double>(x),
                                                  std::span<const double>(h_input));
  for (std::size_t k = 0; k < n; ++k) {
    const long long y_b = binary_dot(bgate->rows[k], input);
    auto [y, hit] = bnn_memo_step((*memo)[k], y_b, policy, [&] {
      return dot_d(row(gate.w_forward, k).data(), x) +
             dot_d(row(gate.w_recurrent, k).data(), h_input);
    });
    out[k] = y;
    (*hits)[k] = hit ? 1 : 0;
  }
  return out;
}

ForwardState forward_pass(const TrainModel& m, const Sequence& seq,
                          const MemoPolicy& policy,
                          const std::vector<BinarizedGate>* bnn, bool keep_tape,
                          ReuseTrace* trace) {
  const std::size_t gates = m.gate_count();
  std::vector<std::vector<BasicMemoState<double>>> memo(
      gates, std::vector<BasicMemoState<double>>(m.hidden));

  ForwardState fs;
  if (keep_tape) fs.steps.reserve(seq.steps);
  VecD h(m.hidden, 0.0);
  VecD c(m.hidden, 0.0);

  for (std::size_t t = 0; t < seq.steps; ++t) {
    StepTape tape;
    tape.x.assign(seq.step(t).begin(), seq.step(t).end());
    tape.h_prev = h;
    tape.preact.resize(gates);
    tape.hit.resize(gates);

    auto eval_gate_idx = [&](std::size_t g, const VecD& h_input) {
      tape.preact[g] = gate_preact(
          m.gates[g], tape.x, h_input, policy,
          policy.kind == PolicyKind::Bnn ? &memo[g] : nullptr,
          bnn ? &(*bnn)[g] : nullptr, &tape.hit[g]);
      if (trace) {
        for (std::size_t k = 0; k < m.hidden; ++k) {
          trace->add(TraceRecord{0, static_cast<std::uint32_t>(t), 0, 0,
                                 static_cast<std::uint8_t>(g),
                                 static_cast<std::uint32_t>(k), tape.hit[g][k]});
        }
      }
    };

    if (m.kind == CellKind::Lstm) {
      tape.c_prev = c;
      eval_gate_idx(0, h);
      eval_gate_idx(1, h);
      eval_gate_idx(2, h);
      eval_gate_idx(3, h);
      tape.ga.resize(m.hidden);
      tape.gb.resize(m.hidden);
      tape.gc.resize(m.hidden);
      tape.gd.resize(m.hidden);
      tape.c.resize(m.hidden);
      tape.h.resize(m.hidden);
      for (std::size_t k = 0; k < m.hidden; ++k) {
        const double i = sigmoid_d(tape.preact[0][k] + m.gates[0].bias[k]);
        const double f = sigmoid_d(tape.preact[1][k] + m.gates[1].bias[k]);
        const double g = std::tanh(tape.preact[2][k] + m.gates[2].bias[k]);
        const double o = sigmoid_d(tape.preact[3][k] + m.gates[3].bias[k]);
        const double cc = f * c[k] + i * g;
        tape.ga[k] = i;
        tape.gb[k] = f;
        tape.gc[k] = g;
        tape.gd[k] = o;
        tape.c[k] = cc;
        tape.h[k] = o * std::tanh(cc);
      }
      c = tape.c;
    } else {
      eval_gate_idx(0, h);
      eval_gate_idx(1, h);
      tape.ga.resize(m.hidden);
      tape.gb.resize(m.hidden);
      tape.gd.resize(m.hidden);
      for (std::size_t k = 0; k < m.hidden; ++k) {
        tape.ga[k] = sigmoid_d(tape.preact[0][k] + m.gates[0].bias[k]);  // z
        tape.gb[k] = sigmoid_d(tape.preact[1][k] + m.gates[1].bias[k]);  // r
      }
      VecD hr(m.hidden);
      for (std::size_t k = 0; k < m.hidden; ++k) hr[k] = tape.gb[k] * h[k];
      tape.gd = hr;
      eval_gate_idx(2, hr);
      tape.gc.resize(m.hidden);
      tape.h.resize(m.hidden);
      for (std::size_t k = 0; k < m.hidden; ++k) {
        const double g = std::tanh(tape.preact[2][k] + m.gates[2].bias[k]);
        tape.gc[k] = g;
        tape.h[k] = (1.0 - tape.ga[k]) * h[k] + tape.ga[k] * g;
      }
    }

    h = tape.h;
    if (keep_tape) fs.steps.push_back(std::move(tape));
  }
  fs.h_last = h;
  return fs;
}

VecD readout(const TrainModel& m, const VecD& h) {
  VecD out(m.w_out.rows);
  for (std::size_t r = 0; r < m.w_out.rows; ++r) {
    out[r] = dot_d(row(m.w_out, r).data(), h) + m.b_out[r];
  }
  return out;
}

// Loss and dL/dlogits for one sequence.
double loss_and_grad(const Dataset& ds, const Sequence& seq, const VecD& pred,
                     VecD* dpred) {
  if (!seq.label) throw ValidationError("train: sequence has no label");
  if (ds.metric_kind() == MetricKind::Mse) {
    const double err = pred[0] - static_cast<double>(*seq.label);
    if (dpred) (*dpred) = {2.0 * err};
    return err * err;
  }
  // Two-class softmax cross entropy.
  const std::size_t label = static_cast<std::size_t>(*seq.label);
  const double mx = std::max(pred[0], pred[1]);
  const double e0 = std::exp(pred[0] - mx);
  const double e1 = std::exp(pred[1] - mx);
  const double z = e0 + e1;
  const double p0 = e0 / z;
  const double p1 = e1 / z;
  if (dpred) {
    *dpred = {p0, p1};
    (*dpred)[label] -= 1.0;
  }
  return -std::log(label == 0 ? p0 : p1);
}

// Accumulates parameter gradients for one sequence. Memoized (hit) neurons
// contribute nothing through their dot products; bias gradients always flow
// because bias is reapplied on top of the substituted value.
void backward_pass(const TrainModel& m, const ForwardState& fs, const VecD& dpred,
                   TrainModel& grad) {
  const std::size_t H = m.hidden;
  VecD dh(H, 0.0);
  for (std::size_t r = 0; r < m.w_out.rows; ++r) {
    for (std::size_t j = 0; j < H; ++j) {
      grad.w_out.at(r, j) += dpred[r] * fs.h_last[j];
      dh[j] += m.w_out.at(r, j) * dpred[r];
    }
    grad.b_out[r] += dpred[r];
  }

  VecD dc(H, 0.0);
  for (std::size_t s = fs.steps.size(); s-- > 0;) {
    const StepTape& tp = fs.steps[s];
    VecD dh_prev(H, 0.0);

    auto accumulate_gate = [&](std::size_t g, const VecD& dpre, const VecD& h_input,
                               VecD* dh_input) {
      const TrainGate& gate = m.gates[g];
      TrainGate& ggrad = grad.gates[g];
      for (std::size_t k = 0; k < H; ++k) {
        ggrad.bias[k] += dpre[k];
        if (tp.hit[g][k]) continue;  // reused value is a constant
        for (std::size_t j = 0; j < gate.w_forward.cols; ++j) {
          ggrad.w_forward.at(k, j) += dpre[k] * tp.x[j];
        }
        for (std::size_t j = 0; j < H; ++j) {
          ggrad.w_recurrent.at(k, j) += dpre[k] * h_input[j];
          if (dh_input) (*dh_input)[j] += gate.w_recurrent.at(k, j) * dpre[k];
        }
      }
    };

    if (m.kind == CellKind::Lstm) {
      const VecD& i = tp.ga;
      const VecD& f = tp.gb;
      const VecD& g = tp.gc;
      const VecD& o = tp.gd;
      VecD dpre_i(H), dpre_f(H), dpre_g(H), dpre_o(H);
      for (std::size_t k = 0; k < H; ++k) {
        const double tc = std::tanh(tp.c[k]);
        const double do_ = dh[k] * tc;
        dc[k] += dh[k] * o[k] * (1.0 - tc * tc);
        const double di = dc[k] * g[k];
        const double df = dc[k] * tp.c_prev[k];
        const double dg = dc[k] * i[k];
        dpre_i[k] = di * i[k] * (1.0 - i[k]);
        dpre_f[k] = df * f[k] * (1.0 - f[k]);
        dpre_g[k] = dg * (1.0 - g[k] * g[k]);
        dpre_o[k] = do_ * o[k] * (1.0 - o[k]);
      }
      accumulate_gate(0, dpre_i, tp.h_prev, &dh_prev);
      accumulate_gate(1, dpre_f, tp.h_prev, &dh_prev);
      accumulate_gate(2, dpre_g, tp.h_prev, &dh_prev);
      accumulate_gate(3, dpre_o, tp.h_prev, &dh_prev);
      for (std::size_t k = 0; k < H; ++k) dc[k] *= f[k];
    } else {
      const VecD& z = tp.ga;
      const VecD& r = tp.gb;
      const VecD& g = tp.gc;
      const VecD& hr = tp.gd;
      VecD dpre_z(H), dpre_r(H), dpre_g(H), dhr(H, 0.0);
      for (std::size_t k = 0; k < H; ++k) {
        const double dz = dh[k] * (g[k] - tp.h_prev[k]);
        const double dg = dh[k] * z[k];
        dh_prev[k] += dh[k] * (1.0 - z[k]);
        dpre_z[k] = dz * z[k] * (1.0 - z[k]);
        dpre_g[k] = dg * (1.0 - g[k] * g[k]);
      }
      accumulate_gate(2, dpre_g, hr, &dhr);
      for (std::size_t k = 0; k < H; ++k) {
        const double dr = dhr[k] * tp.h_prev[k];
        dh_prev[k] += dhr[k] * r[k];
        dpre_r[k] = dr * r[k] * (1.0 - r[k]);
      }
      accumulate_gate(0, dpre_z, tp.h_prev, &dh_prev);
      accumulate_gate(1, dpre_r, tp.h_prev, &dh_prev);
    }

    dh = std::move(dh_prev);
  }
}

void fill_trace_gates(const TrainModel& m, ReuseTrace& trace) {
  for (std::size_t g = 0; g < m.gate_count(); ++g) {
    TraceGateInfo info;
    info.layer = 0;
    info.dir = 0;
    info.gate = static_cast<std::uint8_t>(g);
    info.gate_name = gate_name(m.kind, g);
    info.neurons = static_cast<std::uint32_t>(m.hidden);
    info.fan_in_forward = static_cast<std::uint32_t>(m.input_dim);
    info.fan_in_recurrent = static_cast<std::uint32_t>(m.hidden);
    trace.gates.push_back(std::move(info));
  }
}

}  // namespace

RnnModel TrainModel::to_rnn_model(const std::string& name) const {
  auto to_gate = [&](const TrainGate& g) {
    GateParams out;
    out.w_forward = Matrix(g.w_forward.rows, g.w_forward.cols);
    out.w_recurrent = Matrix(g.w_recurrent.rows, g.w_recurrent.cols);
    out.bias.resize(g.bias.size());
    for (std::size_t i = 0; i < g.w_forward.data.size(); ++i) {
      out.w_forward.data[i] = static_cast<float>(g.w_forward.data[i]);
    }
    for (std::size_t i = 0; i < g.w_recurrent.data.size(); ++i) {
      out.w_recurrent.data[i] = static_cast<float>(g.w_recurrent.data[i]);
    }
    for (std::size_t i = 0; i < g.bias.size(); ++i) {
      out.bias[i] = static_cast<float>(g.bias[i]);
    }
    return out;
  };

  RnnModel model;
  model.name = name;
  model.input_dim = input_dim;
  LayerSpec layer;
  layer.direction = Direction::Forward;
  if (kind == CellKind::Lstm) {
    LstmCellParams cell;
    cell.input_gate = to_gate(gates[0]);
    cell.forget_gate = to_gate(gates[1]);
    cell.update_gate = to_gate(gates[2]);
    cell.output_gate = to_gate(gates[3]);
    layer.forward_cell = std::move(cell);
  } else {
    GruCellParams cell;
    cell.update_gate = to_gate(gates[0]);
    cell.reset_gate = to_gate(gates[1]);
    cell.candidate_gate = to_gate(gates[2]);
    layer.forward_cell = std::move(cell);
  }
  model.layers.push_back(std::move(layer));

  Readout r;
  r.w = Matrix(w_out.rows, w_out.cols);
  for (std::size_t i = 0; i < w_out.data.size(); ++i) {
    r.w.data[i] = static_cast<float>(w_out.data[i]);
  }
  r.bias.resize(b_out.size());
  for (std::size_t i = 0; i < b_out.size(); ++i) r.bias[i] = static_cast<float>(b_out[i]);
  model.readout = std::move(r);
  model.validate();
  return model;
}

TrainModel init_train_model(CellKind kind, std::size_t input_dim, std::size_t hidden,
                            std::size_t readout_dim, std::uint64_t seed) {
  if (input_dim == 0 || hidden == 0 || readout_dim == 0) {
    throw ValidationError("train model: empty dimensions");
  }
  std::mt19937_64 rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u(-k, k);

  TrainModel m;
  m.kind = kind;
  m.input_dim = input_dim;
  m.hidden = hidden;
  const std::size_t n_gates = kind == CellKind::Lstm ? 4 : 3;
  m.gates.resize(n_gates);
  for (TrainGate& g : m.gates) {
    g.w_forward = MatrixD(hidden, input_dim);
    g.w_recurrent = MatrixD(hidden, hidden);
    g.bias.assign(hidden, 0.0);
    for (double& w : g.w_forward.data) w = u(rng);
    for (double& w : g.w_recurrent.data) w = u(rng);
  }
  if (kind == CellKind::Lstm) {
    // Conventional positive forget-gate bias; helps long dependencies.
    for (double& b : m.gates[1].bias) b = 1.0;
  }
  m.w_out = MatrixD(readout_dim, hidden);
  for (double& w : m.w_out.data) w = u(rng);
  m.b_out.assign(readout_dim, 0.0);
  return m;
}

TrainModel zeros_like(const TrainModel& m) {
  TrainModel z = m;
  for (TrainGate& g : z.gates) {
    std::fill(g.w_forward.data.begin(), g.w_forward.data.end(), 0.0);
    std::fill(g.w_recurrent.data.begin(), g.w_recurrent.data.end(), 0.0);
    std::fill(g.bias.begin(), g.bias.end(), 0.0);
  }
  std::fill(z.w_out.data.begin(), z.w_out.data.end(), 0.0);
  std::fill(z.b_out.begin(), z.b_out.end(), 0.0);
  return z;
}

std::vector<double*> param_slots(TrainModel& m) {
  std::vector<double*> slots;
  for (TrainGate& g : m.gates) {
    for (double& w : g.w_forward.data) slots.push_back(&w);
    for (double& w : g.w_recurrent.data) slots.push_back(&w);
    for (double& b : g.bias) slots.push_back(&b);
  }
  for (double& w : m.w_out.data) slots.push_back(&w);
  for (double& b : m.b_out) slots.push_back(&b);
  return slots;
}

void TrainConfig::validate() const {
  if (lr <= 0.0) throw ValidationError("train config: learning rate must be positive");
  if (batch_size == 0) throw ValidationError("train config: batch size must be positive");
  if (theta_train < 0.0 && memo_in_training) {
    throw ValidationError("train config: theta_train must be >= 0");
  }
  if (clip_norm < 0.0) throw ValidationError("train config: clip_norm must be >= 0");
}

TrainForward forward_with_memo(const TrainModel& model, const Sequence& seq,
                               const MemoPolicy& policy) {
  seq.validate();
  if (seq.dim != model.input_dim) {
    throw DimensionError("forward_with_memo: sequence dim does not match model");
  }
  TrainForward out;
  out.trace.policy = policy.kind;
  out.trace.theta = policy.theta;
  out.trace.throttle = policy.throttle;
  out.trace.sequences = 1;
  fill_trace_gates(model, out.trace);

  std::vector<BinarizedGate> bnn;
  if (policy.kind == PolicyKind::Bnn) bnn = binarize_train_model(model);
  ForwardState fs = forward_pass(model, seq, policy,
                                 policy.kind == PolicyKind::Bnn ? &bnn : nullptr, true,
                                 &out.trace);
  out.h.reserve(fs.steps.size());
  for (const StepTape& tp : fs.steps) out.h.push_back(tp.h);
  out.prediction = readout(model, fs.h_last);
  return out;
}

TrainOutput train(TrainModel model, const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();
  if (!ds.labeled()) throw ValidationError("train: dataset must be labeled");
  if (ds.sequences.front().dim != model.input_dim) {
    throw DimensionError("train: dataset dim does not match model");
  }
  const std::vector<std::size_t> train_idx = ds.split_indices("train");

  const MemoPolicy policy = cfg.memo_in_training
                                ? MemoPolicy{PolicyKind::Bnn, cfg.theta_train, true}
                                : MemoPolicy{};

  TrainOutput out;
  out.model = std::move(model);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order = train_idx;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Explicit Fisher-Yates keeps the permutation independent of the
    // standard library's shuffle implementation.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      // Weights are fixed within a batch, so the sign mirror is too.
      std::vector<BinarizedGate> bnn;
      if (policy.kind == PolicyKind::Bnn) bnn = binarize_train_model(out.model);

      TrainModel grad = zeros_like(out.model);
      for (std::size_t i = start; i < end; ++i) {
        const Sequence& seq = ds.sequences[order[i]];
        ForwardState fs =
            forward_pass(out.model, seq, policy,
                         policy.kind == PolicyKind::Bnn ? &bnn : nullptr, true, nullptr);
        VecD pred = readout(out.model, fs.h_last);
        VecD dpred;
        epoch_loss += loss_and_grad(ds, seq, pred, &dpred);
        ++seen;
        backward_pass(out.model, fs, dpred, grad);
      }

      const double scale = 1.0 / static_cast<double>(end - start);
      std::vector<double*> gslots = param_slots(grad);
      double norm_sq = 0.0;
      for (double* g : gslots) {
        *g *= scale;
        norm_sq += (*g) * (*g);
      }
      double clip_scale = 1.0;
      if (cfg.clip_norm > 0.0) {
        const double norm = std::sqrt(norm_sq);
        if (norm > cfg.clip_norm) clip_scale = cfg.clip_norm / norm;
      }
      std::vector<double*> pslots = param_slots(out.model);
      for (std::size_t i = 0; i < pslots.size(); ++i) {
        *pslots[i] -= cfg.lr * clip_scale * *gslots[i];
      }
    }

    const double mean_loss = seen == 0 ? 0.0 : epoch_loss / static_cast<double>(seen);
    if (!std::isfinite(mean_loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                         " (loss is not finite)");
    }
    out.loss_curve.push_back(mean_loss);
  }
  return out;
}

double finite_diff_check(const TrainModel& model, const Dataset& ds,
                         std::size_t max_sequences, double step, std::size_t max_params) {
  ds.validate();
  if (!ds.labeled()) throw ValidationError("finite_diff_check: dataset must be labeled");
  std::vector<std::size_t> idx = ds.split_indices("train");
  if (idx.size() > max_sequences) idx.resize(max_sequences);

  TrainModel work = model;
  const MemoPolicy off{};

  auto loss_of = [&](TrainModel& m) {
    double total = 0.0;
    for (std::size_t i : idx) {
      const Sequence& seq = ds.sequences[i];
      ForwardState fs = forward_pass(m, seq, off, nullptr, false, nullptr);
      const VecD pred = readout(m, fs.h_last);
      total += loss_and_grad(ds, seq, pred, nullptr);
    }
    return total / static_cast<double>(idx.size());
  };

  TrainModel grad = zeros_like(work);
  for (std::size_t i : idx) {
    const Sequence& seq = ds.sequences[i];
    ForwardState fs = forward_pass(work, seq, off, nullptr, true, nullptr);
    VecD pred = readout(work, fs.h_last);
    VecD dpred;
    loss_and_grad(ds, seq, pred, &dpred);
    backward_pass(work, fs, dpred, grad);
  }
  std::vector<double*> gslots = param_slots(grad);
  for (double* g : gslots) *g /= static_cast<double>(idx.size());

  std::vector<double*> pslots = param_slots(work);
  const std::size_t stride = std::max<std::size_t>(1, pslots.size() / max_params);
  double max_rel = 0.0;
  for (std::size_t p = 0; p < pslots.size(); p += stride) {
    const double saved = *pslots[p];
    *pslots[p] = saved + step;
    const double up = loss_of(work);
    *pslots[p] = saved - step;
    const double down = loss_of(work);
    *pslots[p] = saved;
    const double fd = (up - down) / (2.0 * step);
    const double an = *gslots[p];
    const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace rnnmemo
