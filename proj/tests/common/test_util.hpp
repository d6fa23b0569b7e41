// Test-only helpers: random model/data generators and independently written
// reference implementations used as oracles. These deliberately avoid the
// library's evaluation path (plain loops, no hooks) so they can catch bugs
// in it.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "core/memo.hpp"
#include "core/rnn.hpp"

namespace testutil {

using rnnmemo::CellKind;
using rnnmemo::CellParams;
using rnnmemo::Direction;
using rnnmemo::GateParams;
using rnnmemo::GruCellParams;
using rnnmemo::LayerSpec;
using rnnmemo::LstmCellParams;
using rnnmemo::Matrix;
using rnnmemo::RnnModel;
using rnnmemo::Vec;

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                            float scale) {
  std::uniform_real_distribution<float> u(-scale, scale);
  Matrix m(rows, cols);
  for (float& x : m.data) x = u(rng);
  return m;
}

inline Vec random_vec(std::mt19937_64& rng, std::size_t n, float scale = 1.0f) {
  std::uniform_real_distribution<float> u(-scale, scale);
  Vec v(n);
  for (float& x : v) x = u(rng);
  return v;
}

inline GateParams random_gate(std::mt19937_64& rng, std::size_t neurons,
                              std::size_t input_dim, std::size_t hidden_dim,
                              bool peephole = false) {
  const float scale = 1.0f / std::sqrt(static_cast<float>(input_dim + hidden_dim));
  GateParams g;
  g.w_forward = random_matrix(rng, neurons, input_dim, scale);
  g.w_recurrent = random_matrix(rng, neurons, hidden_dim, scale);
  g.bias = random_vec(rng, neurons, 0.1f);
  if (peephole) g.peephole = random_vec(rng, neurons, scale);
  return g;
}

inline LstmCellParams random_lstm_cell(std::mt19937_64& rng, std::size_t neurons,
                                       std::size_t input_dim, bool peephole = false) {
  LstmCellParams c;
  c.input_gate = random_gate(rng, neurons, input_dim, neurons, peephole);
  c.forget_gate = random_gate(rng, neurons, input_dim, neurons, peephole);
  c.update_gate = random_gate(rng, neurons, input_dim, neurons, false);
  c.output_gate = random_gate(rng, neurons, input_dim, neurons, peephole);
  return c;
}

inline GruCellParams random_gru_cell(std::mt19937_64& rng, std::size_t neurons,
                                     std::size_t input_dim) {
  GruCellParams c;
  c.update_gate = random_gate(rng, neurons, input_dim, neurons);
  c.reset_gate = random_gate(rng, neurons, input_dim, neurons);
  c.candidate_gate = random_gate(rng, neurons, input_dim, neurons);
  return c;
}

inline CellParams random_cell(std::mt19937_64& rng, CellKind kind, std::size_t neurons,
                              std::size_t input_dim, bool peephole = false) {
  if (kind == CellKind::Lstm) return random_lstm_cell(rng, neurons, input_dim, peephole);
  return random_gru_cell(rng, neurons, input_dim);
}

// Random stacked model; dims stay small enough for exhaustive comparisons.
inline RnnModel random_model(std::uint64_t seed, std::size_t max_hidden = 16,
                             std::size_t max_layers = 2, bool allow_bidir = true,
                             bool allow_peephole = true, bool with_readout = false) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> hidden_dist(1, max_hidden);
  std::uniform_int_distribution<std::size_t> input_dist(1, 8);
  std::uniform_int_distribution<std::size_t> layer_dist(1, max_layers);
  std::uniform_int_distribution<int> kind_dist(0, 1);
  std::uniform_int_distribution<int> dir_dist(0, allow_bidir ? 2 : 0);
  std::uniform_int_distribution<int> peep_dist(0, 3);

  RnnModel model;
  model.name = "random-" + std::to_string(seed);
  model.input_dim = input_dist(rng);
  const std::size_t n_layers = layer_dist(rng);
  std::size_t dim = model.input_dim;
  const CellKind kind = kind_dist(rng) == 0 ? CellKind::Lstm : CellKind::Gru;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t hidden = hidden_dist(rng);
    const bool peephole =
        allow_peephole && kind == CellKind::Lstm && peep_dist(rng) == 0;
    LayerSpec layer;
    const int dir = dir_dist(rng);
    layer.direction = dir == 0   ? Direction::Forward
                      : dir == 1 ? Direction::Backward
                                 : Direction::Bidirectional;
    layer.forward_cell = random_cell(rng, kind, hidden, dim, peephole);
    if (layer.direction == Direction::Bidirectional) {
      layer.backward_cell = random_cell(rng, kind, hidden, dim, peephole);
    }
    dim = layer.output_dim();
    model.layers.push_back(std::move(layer));
  }
  if (with_readout) {
    rnnmemo::Readout r;
    r.w = random_matrix(rng, 1, dim, 0.5f);
    r.bias = random_vec(rng, 1, 0.1f);
    model.readout = std::move(r);
  }
  model.validate();
  return model;
}

inline std::vector<Vec> random_inputs(std::mt19937_64& rng, std::size_t steps,
                                      std::size_t dim, float scale = 1.0f) {
  std::vector<Vec> xs(steps);
  for (Vec& x : xs) x = random_vec(rng, dim, scale);
  return xs;
}

// ---------------------------------------------------------------------------
// Straight-line cell references (independent of eval_gate / hooks).

inline float ref_sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

inline std::vector<Vec> ref_lstm_forward(const LstmCellParams& cell,
                                         const std::vector<Vec>& xs) {
  const std::size_t N = cell.neurons();
  Vec h(N, 0.0f), c(N, 0.0f);
  std::vector<Vec> out;
  for (const Vec& x : xs) {
    Vec nh(N), nc(N);
    for (std::size_t n = 0; n < N; ++n) {
      float ai = 0, af = 0, ag = 0, ao = 0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        ai += cell.input_gate.w_forward.at(n, j) * x[j];
        af += cell.forget_gate.w_forward.at(n, j) * x[j];
        ag += cell.update_gate.w_forward.at(n, j) * x[j];
        ao += cell.output_gate.w_forward.at(n, j) * x[j];
      }
      for (std::size_t j = 0; j < N; ++j) {
        ai += cell.input_gate.w_recurrent.at(n, j) * h[j];
        af += cell.forget_gate.w_recurrent.at(n, j) * h[j];
        ag += cell.update_gate.w_recurrent.at(n, j) * h[j];
        ao += cell.output_gate.w_recurrent.at(n, j) * h[j];
      }
      float pi = ai + cell.input_gate.bias[n];
      float pf = af + cell.forget_gate.bias[n];
      if (cell.input_gate.peephole) pi += (*cell.input_gate.peephole)[n] * c[n];
      if (cell.forget_gate.peephole) pf += (*cell.forget_gate.peephole)[n] * c[n];
      const float i = ref_sigmoid(pi);
      const float f = ref_sigmoid(pf);
      const float g = std::tanh(ag + cell.update_gate.bias[n]);
      const float cc = f * c[n] + i * g;
      float po = ao + cell.output_gate.bias[n];
      if (cell.output_gate.peephole) po += (*cell.output_gate.peephole)[n] * cc;
      const float o = ref_sigmoid(po);
      nc[n] = cc;
      nh[n] = o * std::tanh(cc);
    }
    h = nh;
    c = nc;
    out.push_back(h);
  }
  return out;
}

inline std::vector<Vec> ref_gru_forward(const GruCellParams& cell,
                                        const std::vector<Vec>& xs) {
  const std::size_t N = cell.neurons();
  Vec h(N, 0.0f);
  std::vector<Vec> out;
  for (const Vec& x : xs) {
    Vec z(N), r(N);
    for (std::size_t n = 0; n < N; ++n) {
      float az = 0, ar = 0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        az += cell.update_gate.w_forward.at(n, j) * x[j];
        ar += cell.reset_gate.w_forward.at(n, j) * x[j];
      }
      for (std::size_t j = 0; j < N; ++j) {
        az += cell.update_gate.w_recurrent.at(n, j) * h[j];
        ar += cell.reset_gate.w_recurrent.at(n, j) * h[j];
      }
      z[n] = ref_sigmoid(az + cell.update_gate.bias[n]);
      r[n] = ref_sigmoid(ar + cell.reset_gate.bias[n]);
    }
    Vec nh(N);
    for (std::size_t n = 0; n < N; ++n) {
      float ag = 0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        ag += cell.candidate_gate.w_forward.at(n, j) * x[j];
      }
      for (std::size_t j = 0; j < N; ++j) {
        ag += cell.candidate_gate.w_recurrent.at(n, j) * (r[j] * h[j]);
      }
      const float g = std::tanh(ag + cell.candidate_gate.bias[n]);
      nh[n] = (1.0f - z[n]) * h[n] + z[n] * g;
    }
    h = nh;
    out.push_back(h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalar replay of the memoization state machines, written as an explicit
// transcript simulator. Used to cross-check bnn_memo_step / oracle_memo_step.

struct ReplayStep {
  double value = 0.0;  // value returned to the caller
  bool hit = false;
  double delta_after = 0.0;
  double y_m_after = 0.0;
  long long y_m_b_after = 0;
};

inline double replay_rel(double cur, double cached) {
  if (cur == 0.0) return cached == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::fabs(cur - cached) / std::fabs(cur);
}

// stream: per step (bnn output, exact full-precision value).
inline std::vector<ReplayStep> replay_bnn(
    const std::vector<std::pair<long long, double>>& stream, double theta, bool throttle) {
  std::vector<ReplayStep> out;
  double y_m = 0.0;
  long long y_m_b = 0;
  double delta = 0.0;
  bool valid = false;
  for (const auto& [y_b, exact] : stream) {
    ReplayStep step;
    bool reuse = false;
    if (valid) {
      const double eps = replay_rel(static_cast<double>(y_b), static_cast<double>(y_m_b));
      const double cand = throttle ? delta + eps : eps;
      if (cand <= theta) {
        reuse = true;
        delta = cand;
      }
    }
    if (reuse) {
      step.value = y_m;
      step.hit = true;
    } else {
      y_m = exact;
      y_m_b = y_b;
      delta = 0.0;
      valid = true;
      step.value = exact;
      step.hit = false;
    }
    step.delta_after = delta;
    step.y_m_after = y_m;
    step.y_m_b_after = y_m_b;
    out.push_back(step);
  }
  return out;
}

inline std::vector<ReplayStep> replay_oracle(const std::vector<double>& stream,
                                             double theta) {
  std::vector<ReplayStep> out;
  double y_m = 0.0;
  double delta = 0.0;
  bool valid = false;
  for (double exact : stream) {
    ReplayStep step;
    bool reuse = false;
    if (valid) {
      const double d = replay_rel(exact, y_m);
      if (d <= theta) {
        reuse = true;
        delta = d;
      }
    }
    if (reuse) {
      step.value = y_m;
      step.hit = true;
    } else {
      y_m = exact;
      delta = 0.0;
      valid = true;
      step.value = exact;
      step.hit = false;
    }
    step.delta_after = delta;
    step.y_m_after = y_m;
    out.push_back(step);
  }
  return out;
}

// Unpacked +/-1 scalar product (oracle for binary_dot).
inline long long ref_sign_product(const std::vector<int>& a, const std::vector<int>& b) {
  long long acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Two-pass Pearson correlation (oracle for the streaming accumulator).
inline double ref_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return cov / std::sqrt(vx * vy);
}

}  // namespace testutil
