#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace rnnmemo {

// All writes go to a temp file in the target directory followed by an atomic
// rename, so a failed command never leaves partial output behind.
void write_file_atomic(const std::string& path, std::string_view content);
void write_file_atomic(const std::string& path, const void* data, std::size_t bytes);

std::string read_text_file(const std::string& path);
std::vector<float> read_float_blob(const std::string& path, std::size_t expected_count);
void write_float_blob(const std::string& path, const float* data, std::size_t count);

void ensure_directory(const std::string& dir);

nlohmann::json read_json_file(const std::string& path);
void write_json_file_atomic(const std::string& path, const nlohmann::json& j);

std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace rnnmemo
