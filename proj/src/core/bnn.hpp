#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/rnn.hpp"

namespace rnnmemo {

// Packed sign bits, 64 per word. Bit value 1 encodes +1, 0 encodes -1.
// Bits beyond the logical length are always zero so popcounts stay exact.
struct BitVector {
  std::vector<std::uint64_t> words;
  std::size_t bits = 0;

  static BitVector zeros(std::size_t nbits) {
    BitVector v;
    v.bits = nbits;
    v.words.assign((nbits + 63) / 64, 0);
    return v;
  }

  void set(std::size_t i, bool b) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (b) {
      words[i / 64] |= mask;
    } else {
      words[i / 64] &= ~mask;
    }
  }

  bool get(std::size_t i) const {
    return (words[i / 64] >> (i % 64)) & 1u;
  }
};

// Sign binarization: +1 iff x >= 0.
template <class Real>
inline bool binarize(Real x) {
  return x >= Real(0);
}

// Packed signs of concat(x, h).
template <class Real>
BitVector binarize_concat(std::span<const Real> x, std::span<const Real> h) {
  BitVector v = BitVector::zeros(x.size() + h.size());
  for (std::size_t i = 0; i < x.size(); ++i) v.set(i, binarize(x[i]));
  for (std::size_t i = 0; i < h.size(); ++i) v.set(x.size() + i, binarize(h[i]));
  return v;
}

// Sign mirror of a gate: one row per neuron, each the packed signs of
// concat(w_forward.row(n), w_recurrent.row(n)). Bias and peephole excluded.
struct BinarizedGate {
  std::vector<BitVector> rows;

  std::size_t neurons() const { return rows.size(); }
  std::size_t bits() const { return rows.empty() ? 0 : rows.front().bits; }
};

BinarizedGate binarize_gate(const GateParams& gate);

// +/-1 scalar product via XNOR + popcount: 2*agree(w,x) - length.
long long binary_dot(const BitVector& w, const BitVector& x);

// Binarizes concat(x, h_prev) and evaluates row `neuron`.
long long bnn_neuron_output(const BinarizedGate& bgate, std::size_t neuron,
                            std::span<const float> x, std::span<const float> h_prev);

}  // namespace rnnmemo
