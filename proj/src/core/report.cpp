#include "core/report.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "core/errors.hpp"
#include "core/io.hpp"

namespace fs = std::filesystem;

namespace rnnmemo {

void Report::seal() {
  if (!body.contains("config")) throw ValidationError("report: missing config section");
  body["config_hash"] = "fnv1a64:" + hex64(fnv1a64(body["config"].dump()));
}

void Report::write(const std::string& dir) const {
  ensure_directory(dir);
  write_json_file_atomic((fs::path(dir) / "report.json").string(), body);
  for (const auto& [rel, content] : artifacts) {
    write_file_atomic((fs::path(dir) / rel).string(), content);
  }
}

double Report::scalar(const std::string& dotted_path) const {
  const nlohmann::json* node = &body;
  std::size_t start = 0;
  while (start <= dotted_path.size()) {
    const std::size_t dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_number()) return node->get<double>();
  if (node->is_boolean()) return node->get<bool>() ? 1.0 : 0.0;
  return std::numeric_limits<double>::quiet_NaN();
}

std::string two_column_series(const std::vector<std::pair<double, double>>& xy) {
  std::ostringstream os;
  for (const auto& [x, y] : xy) {
    os << x << ' ' << y << '\n';
  }
  return os.str();
}

}  // namespace rnnmemo
