#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "core/errors.hpp"

namespace rnnmemo {

using Vec = std::vector<float>;

// Dense row-major matrix, single precision.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, float fill = 0.0f)
      : rows(r), cols(c), data(r * c, fill) {}

  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(data).subspan(r * cols, cols);
  }
  std::span<float> row(std::size_t r) {
    return std::span<float>(data).subspan(r * cols, cols);
  }
};

// Single-precision accumulation, strictly left to right. The summation order
// is part of the contract so repeated runs are bit-identical.
float dot(std::span<const float> a, std::span<const float> b);

// result[i] = dot(m.row(i), v)
Vec matvec(const Matrix& m, std::span<const float> v);

float sigmoid(float x);
inline float tanh_act(float x) { return std::tanh(x); }

void sigmoid_inplace(Vec& v);
void tanh_inplace(Vec& v);

Vec elementwise_mul(std::span<const float> a, std::span<const float> b);
void add_inplace(Vec& a, std::span<const float> b);

}  // namespace rnnmemo
