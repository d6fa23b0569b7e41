#include "core/dataset.hpp"

#include <filesystem>

#include "core/io.hpp"

namespace fs = std::filesystem;

namespace rnnmemo {

const char* metric_kind_name(MetricKind k) {
  return k == MetricKind::Accuracy ? "accuracy" : "mse";
}

std::vector<Vec> Sequence::as_vectors() const {
  std::vector<Vec> out(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    auto s = step(t);
    out[t].assign(s.begin(), s.end());
  }
  return out;
}

void Sequence::validate() const {
  if (steps == 0 || dim == 0) throw ValidationError("sequence: empty dims");
  if (data.size() != steps * dim) throw ValidationError("sequence: data size mismatch");
}

bool Dataset::labeled() const {
  if (sequences.empty()) return false;
  for (const Sequence& s : sequences) {
    if (!s.label) return false;
  }
  return true;
}

MetricKind Dataset::metric_kind() const {
  if (kind == "classification") return MetricKind::Accuracy;
  if (kind == "regression") return MetricKind::Mse;
  throw ValidationError("dataset kind '" + kind + "' has no accuracy metric");
}

std::vector<std::size_t> Dataset::split_indices(const std::string& split) const {
  std::vector<std::size_t> out;
  if (!split.empty() && split != "all") {
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      if (sequences[i].split == split) out.push_back(i);
    }
    if (!out.empty()) return out;
  }
  out.resize(sequences.size());
  for (std::size_t i = 0; i < sequences.size(); ++i) out[i] = i;
  return out;
}

void Dataset::validate() const {
  if (sequences.empty()) throw ValidationError("dataset: no sequences");
  const std::size_t dim = sequences.front().dim;
  for (const Sequence& s : sequences) {
    s.validate();
    if (s.dim != dim) throw ValidationError("dataset: inconsistent feature dims");
  }
  if (kind != "none" && kind != "regression" && kind != "classification") {
    throw ValidationError("dataset: unknown kind " + kind);
  }
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  ds.validate();
  ensure_directory(dir);
  nlohmann::json seqs = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    const Sequence& s = ds.sequences[i];
    const std::string file = "seq" + std::to_string(i) + ".bin";
    write_float_blob((fs::path(dir) / file).string(), s.data.data(), s.data.size());
    nlohmann::json j = {{"file", file}, {"steps", s.steps}, {"dim", s.dim}, {"split", s.split}};
    if (s.label) j["label"] = *s.label;
    seqs.push_back(std::move(j));
  }
  const nlohmann::json manifest = {
      {"format_version", 1}, {"kind", ds.kind}, {"sequences", seqs}};
  write_json_file_atomic((fs::path(dir) / "manifest.json").string(), manifest);
}

Dataset load_dataset(const std::string& dir) {
  const nlohmann::json manifest = read_json_file((fs::path(dir) / "manifest.json").string());
  if (manifest.value("format_version", 0) != 1) {
    throw ValidationError("dataset: unsupported format version");
  }
  Dataset ds;
  ds.kind = manifest.value("kind", "none");
  for (const auto& j : manifest.at("sequences")) {
    Sequence s;
    s.steps = j.at("steps").get<std::size_t>();
    s.dim = j.at("dim").get<std::size_t>();
    s.split = j.value("split", "test");
    if (j.contains("label")) s.label = j.at("label").get<float>();
    const std::string file = j.at("file").get<std::string>();
    s.data = read_float_blob((fs::path(dir) / file).string(), s.steps * s.dim);
    ds.sequences.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

}  // namespace rnnmemo
