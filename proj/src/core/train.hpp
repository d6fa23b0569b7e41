#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/memo.hpp"
#include "core/rnn.hpp"
#include "core/task.hpp"

namespace rnnmemo {

using VecD = std::vector<double>;

struct MatrixD {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  MatrixD() = default;
  MatrixD(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct TrainGate {
  MatrixD w_forward;
  MatrixD w_recurrent;
  VecD bias;
};

// Single-layer cell plus readout head, held in double precision for the
// trainer. Gate order matches the inference cells: i,f,g,o / z,r,g.
struct TrainModel {
  CellKind kind = CellKind::Lstm;
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::vector<TrainGate> gates;
  MatrixD w_out;
  VecD b_out;

  std::size_t gate_count() const { return gates.size(); }
  RnnModel to_rnn_model(const std::string& name) const;
};

TrainModel init_train_model(CellKind kind, std::size_t input_dim, std::size_t hidden,
                            std::size_t readout_dim, std::uint64_t seed);
TrainModel zeros_like(const TrainModel& m);
std::vector<double*> param_slots(TrainModel& m);

struct TrainConfig {
  double lr = 0.05;
  std::size_t epochs = 60;
  std::size_t batch_size = 32;
  double theta_train = 0.0;
  bool memo_in_training = false;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;  // 0 disables clipping

  void validate() const;
};

struct TrainForward {
  std::vector<VecD> h;  // hidden output per timestep
  VecD prediction;
  double loss = 0.0;
  ReuseTrace trace;
};

// Training-time forward pass with the BNN memoization policy injected. On a
// reuse the neuron's cached pre-activation is substituted and treated as a
// constant by the backward pass (no gradient flows through the decision).
TrainForward forward_with_memo(const TrainModel& model, const Sequence& seq,
                               const MemoPolicy& policy);

struct TrainOutput {
  TrainModel model;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

// Plain SGD with BPTT over the train split; deterministic under a fixed
// seed. Aborts with NumericError when the loss stops being finite.
TrainOutput train(TrainModel model, const Dataset& ds, const TrainConfig& cfg);

// Central finite differences vs. the analytic gradients on a downsampled
// parameter set, memoization disabled. Returns the max relative error.
double finite_diff_check(const TrainModel& model, const Dataset& ds,
                         std::size_t max_sequences = 3, double step = 1e-4,
                         std::size_t max_params = 150);

}  // namespace rnnmemo
