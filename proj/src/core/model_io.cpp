#include "core/model_io.hpp"

#include <filesystem>

#include "core/io.hpp"

namespace fs = std::filesystem;

namespace rnnmemo {

namespace {

constexpr int kFormatVersion = 1;

std::string tensor_file(std::size_t layer, const char* dir, const char* gate,
                        const char* part) {
  return "layer" + std::to_string(layer) + "." + dir + "." + gate + "." + part + ".bin";
}

nlohmann::json save_gate(const GateParams& g, std::size_t layer, const char* dir_tag,
                         const char* gate_tag, const std::string& out_dir) {
  nlohmann::json j;
  const std::string wf = tensor_file(layer, dir_tag, gate_tag, "wf");
  const std::string wr = tensor_file(layer, dir_tag, gate_tag, "wr");
  const std::string b = tensor_file(layer, dir_tag, gate_tag, "b");
  write_float_blob((fs::path(out_dir) / wf).string(), g.w_forward.data.data(),
                   g.w_forward.data.size());
  write_float_blob((fs::path(out_dir) / wr).string(), g.w_recurrent.data.data(),
                   g.w_recurrent.data.size());
  write_float_blob((fs::path(out_dir) / b).string(), g.bias.data(), g.bias.size());
  j["w_forward"] = {{"file", wf}, {"rows", g.w_forward.rows}, {"cols", g.w_forward.cols}};
  j["w_recurrent"] = {{"file", wr}, {"rows", g.w_recurrent.rows}, {"cols", g.w_recurrent.cols}};
  j["bias"] = {{"file", b}, {"len", g.bias.size()}};
  if (g.peephole) {
    const std::string p = tensor_file(layer, dir_tag, gate_tag, "p");
    write_float_blob((fs::path(out_dir) / p).string(), g.peephole->data(),
                     g.peephole->size());
    j["peephole"] = {{"file", p}, {"len", g.peephole->size()}};
  }
  return j;
}

nlohmann::json save_cell(const CellParams& cell, std::size_t layer, const char* dir_tag,
                         const std::string& out_dir) {
  nlohmann::json gates;
  const CellKind kind = cell_kind(cell);
  for (std::size_t g = 0; g < cell_gate_count(kind); ++g) {
    const char* tag = gate_name(kind, g);
    gates[tag] = save_gate(cell_gate(cell, g), layer, dir_tag, tag, out_dir);
  }
  return gates;
}

Matrix load_matrix(const nlohmann::json& j, const std::string& dir) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = read_float_blob((fs::path(dir) / j.at("file").get<std::string>()).string(),
                           m.rows * m.cols);
  return m;
}

Vec load_vec(const nlohmann::json& j, const std::string& dir) {
  const auto len = j.at("len").get<std::size_t>();
  return read_float_blob((fs::path(dir) / j.at("file").get<std::string>()).string(), len);
}

GateParams load_gate(const nlohmann::json& j, const std::string& dir) {
  GateParams g;
  g.w_forward = load_matrix(j.at("w_forward"), dir);
  g.w_recurrent = load_matrix(j.at("w_recurrent"), dir);
  g.bias = load_vec(j.at("bias"), dir);
  if (j.contains("peephole")) g.peephole = load_vec(j.at("peephole"), dir);
  return g;
}

CellParams load_cell(CellKind kind, const nlohmann::json& gates, const std::string& dir) {
  if (kind == CellKind::Lstm) {
    LstmCellParams c;
    c.input_gate = load_gate(gates.at("i"), dir);
    c.forget_gate = load_gate(gates.at("f"), dir);
    c.update_gate = load_gate(gates.at("g"), dir);
    c.output_gate = load_gate(gates.at("o"), dir);
    return c;
  }
  GruCellParams c;
  c.update_gate = load_gate(gates.at("z"), dir);
  c.reset_gate = load_gate(gates.at("r"), dir);
  c.candidate_gate = load_gate(gates.at("g"), dir);
  return c;
}

Direction direction_from_name(const std::string& s) {
  if (s == "forward") return Direction::Forward;
  if (s == "backward") return Direction::Backward;
  if (s == "bidirectional") return Direction::Bidirectional;
  throw ValidationError("unknown direction: " + s);
}

CellKind cell_kind_from_name(const std::string& s) {
  if (s == "lstm") return CellKind::Lstm;
  if (s == "gru") return CellKind::Gru;
  throw ValidationError("unknown cell kind: " + s);
}

}  // namespace

void save_model(const RnnModel& model, const std::string& dir) {
  model.validate();
  ensure_directory(dir);
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& layer = model.layers[l];
    nlohmann::json j = {{"cell", cell_kind_name(layer.kind())},
                        {"direction", direction_name(layer.direction)},
                        {"input_dim", layer.input_dim()},
                        {"hidden_dim", layer.hidden_dim()},
                        {"gates", save_cell(layer.forward_cell, l, "fwd", dir)}};
    if (layer.backward_cell) {
      j["gates_backward"] = save_cell(*layer.backward_cell, l, "bwd", dir);
    }
    layers.push_back(std::move(j));
  }
  nlohmann::json manifest = {{"format_version", kFormatVersion},
                             {"name", model.name},
                             {"input_dim", model.input_dim},
                             {"layers", layers}};
  if (model.readout) {
    write_float_blob((fs::path(dir) / "readout.w.bin").string(),
                     model.readout->w.data.data(), model.readout->w.data.size());
    write_float_blob((fs::path(dir) / "readout.b.bin").string(), model.readout->bias.data(),
                     model.readout->bias.size());
    manifest["readout"] = {
        {"w", {{"file", "readout.w.bin"}, {"rows", model.readout->w.rows},
               {"cols", model.readout->w.cols}}},
        {"bias", {{"file", "readout.b.bin"}, {"len", model.readout->bias.size()}}}};
  }
  write_json_file_atomic((fs::path(dir) / "manifest.json").string(), manifest);
}

RnnModel load_model(const std::string& dir) {
  const nlohmann::json manifest = read_json_file((fs::path(dir) / "manifest.json").string());
  if (manifest.value("format_version", 0) != kFormatVersion) {
    throw ValidationError("model: unsupported format version");
  }
  RnnModel model;
  model.name = manifest.value("name", "model");
  model.format_version = kFormatVersion;
  model.input_dim = manifest.at("input_dim").get<std::size_t>();
  for (const auto& j : manifest.at("layers")) {
    LayerSpec layer;
    const CellKind kind = cell_kind_from_name(j.at("cell").get<std::string>());
    layer.direction = direction_from_name(j.at("direction").get<std::string>());
    layer.forward_cell = load_cell(kind, j.at("gates"), dir);
    if (j.contains("gates_backward")) {
      layer.backward_cell = load_cell(kind, j.at("gates_backward"), dir);
    }
    model.layers.push_back(std::move(layer));
  }
  if (manifest.contains("readout")) {
    Readout r;
    r.w = load_matrix(manifest.at("readout").at("w"), dir);
    r.bias = load_vec(manifest.at("readout").at("bias"), dir);
    model.readout = std::move(r);
  }
  model.validate();
  return model;
}

}  // namespace rnnmemo
