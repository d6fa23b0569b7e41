#include "core/tensor.hpp"

namespace rnnmemo {

float dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: length mismatch");
  }
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

Vec matvec(const Matrix& m, std::span<const float> v) {
  if (m.cols != v.size()) {
    throw DimensionError("matvec: matrix cols do not match vector length");
  }
  Vec out(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    out[r] = dot(m.row(r), v);
  }
  return out;
}

float sigmoid(float x) {
  // Branch keeps exp() argument non-positive so it never overflows.
  if (x >= 0.0f) {
    return 1.0f / (1.0f + std::exp(-x));
  }
  const float e = std::exp(x);
  return e / (1.0f + e);
}

void sigmoid_inplace(Vec& v) {
  for (float& x : v) x = sigmoid(x);
}

void tanh_inplace(Vec& v) {
  for (float& x : v) x = std::tanh(x);
}

Vec elementwise_mul(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DimensionError("elementwise_mul: length mismatch");
  }
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void add_inplace(Vec& a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DimensionError("add_inplace: length mismatch");
  }
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace rnnmemo
