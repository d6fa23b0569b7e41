#pragma once

#include <string>

#include "core/rnn.hpp"

namespace rnnmemo {

// On-disk model bundle: a directory with manifest.json plus one raw blob per
// tensor (row-major, little-endian, 4-byte floats). Saving and loading
// preserve blob bytes exactly.
void save_model(const RnnModel& model, const std::string& dir);
RnnModel load_model(const std::string& dir);

}  // namespace rnnmemo
