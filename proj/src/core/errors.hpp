#pragma once

#include <stdexcept>

namespace rnnmemo {

// Shape/size mismatch between operands.
class DimensionError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inconsistent model, dataset, trace or configuration content.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (e.g. training loss diverged to NaN).
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rnnmemo
