#include "core/bnn.hpp"

#include <bit>
#include <stdexcept>

namespace rnnmemo {

BinarizedGate binarize_gate(const GateParams& gate) {
  BinarizedGate out;
  out.rows.reserve(gate.neurons());
  for (std::size_t n = 0; n < gate.neurons(); ++n) {
    out.rows.push_back(
        binarize_concat<float>(gate.w_forward.row(n), gate.w_recurrent.row(n)));
  }
  return out;
}

long long binary_dot(const BitVector& w, const BitVector& x) {
  if (w.bits != x.bits) {
    throw DimensionError("binary_dot: length mismatch");
  }
  if (w.bits == 0) return 0;
  std::uint64_t agree = 0;
  const std::size_t nw = w.words.size();
  for (std::size_t i = 0; i + 1 < nw; ++i) {
    agree += static_cast<std::uint64_t>(std::popcount(~(w.words[i] ^ x.words[i])));
  }
  // ~XNOR sets the unused trailing bits, mask them away.
  const std::size_t tail = w.bits - (nw - 1) * 64;
  const std::uint64_t mask = tail == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << tail) - 1;
  agree += static_cast<std::uint64_t>(
      std::popcount((~(w.words[nw - 1] ^ x.words[nw - 1])) & mask));
  return 2 * static_cast<long long>(agree) - static_cast<long long>(w.bits);
}

long long bnn_neuron_output(const BinarizedGate& bgate, std::size_t neuron,
                            std::span<const float> x, std::span<const float> h_prev) {
  if (neuron >= bgate.neurons()) {
    throw std::out_of_range("bnn_neuron_output: neuron index out of range");
  }
  const BitVector input = binarize_concat<float>(x, h_prev);
  return binary_dot(bgate.rows[neuron], input);
}

}  // namespace rnnmemo
