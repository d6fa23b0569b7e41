#include "core/trace.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace rnnmemo {

const char* policy_kind_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::Disabled: return "off";
    case PolicyKind::Oracle: return "oracle";
    case PolicyKind::Bnn: return "bnn";
  }
  return "?";
}

PolicyKind policy_kind_from_name(const std::string& s) {
  if (s == "off" || s == "disabled") return PolicyKind::Disabled;
  if (s == "oracle") return PolicyKind::Oracle;
  if (s == "bnn") return PolicyKind::Bnn;
  throw ValidationError("unknown policy kind: " + s);
}

void ReuseTrace::append(const ReuseTrace& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  sequences += other.sequences;
}

std::uint64_t ReuseTrace::hits() const {
  std::uint64_t n = 0;
  for (const TraceRecord& r : records) n += r.hit;
  return n;
}

double ReuseTrace::reuse_fraction() const {
  if (records.empty()) return 0.0;
  return static_cast<double>(hits()) / static_cast<double>(records.size());
}

const TraceGateInfo* ReuseTrace::find_gate(std::uint16_t layer, std::uint8_t dir,
                                           std::uint8_t gate) const {
  for (const TraceGateInfo& g : gates) {
    if (g.layer == layer && g.dir == dir && g.gate == gate) return &g;
  }
  return nullptr;
}

void ReuseTrace::validate() const {
  if (gates.empty()) throw ValidationError("trace: no gate dimension table");
  if (records.empty()) throw ValidationError("trace: no records");
  if (sequences == 0) throw ValidationError("trace: sequence count is zero");
  for (const TraceRecord& r : records) {
    const TraceGateInfo* g = find_gate(r.layer, r.dir, r.gate);
    if (!g) throw ValidationError("trace: record references unknown gate");
    if (r.neuron >= g->neurons) throw ValidationError("trace: neuron index out of range");
    if (r.sequence >= sequences) throw ValidationError("trace: sequence index out of range");
  }
}

void ReuseTrace::write_csv(std::ostream& os) const {
  os << "# rnnmemo-trace v1\n";
  os << "# policy=" << policy_kind_name(policy) << " theta=" << theta
     << " throttle=" << (throttle ? 1 : 0) << " sequences=" << sequences << "\n";
  for (const TraceGateInfo& g : gates) {
    os << "# gate layer=" << g.layer << " dir=" << static_cast<int>(g.dir)
       << " gate=" << static_cast<int>(g.gate) << " name=" << g.gate_name
       << " neurons=" << g.neurons << " F=" << g.fan_in_forward
       << " R=" << g.fan_in_recurrent << "\n";
  }
  os << "sequence,timestep,layer,dir,gate,neuron,hit\n";
  for (const TraceRecord& r : records) {
    os << r.sequence << ',' << r.timestep << ',' << r.layer << ','
       << static_cast<int>(r.dir) << ',' << static_cast<int>(r.gate) << ','
       << r.neuron << ',' << static_cast<int>(r.hit) << "\n";
  }
}

namespace {

// "key=value" scanner for the comment header lines.
std::string meta_value(const std::string& line, const std::string& key) {
  const std::string needle = key + "=";
  const auto pos = line.find(needle);
  if (pos == std::string::npos) {
    throw ValidationError("trace: missing field '" + key + "' in: " + line);
  }
  const auto start = pos + needle.size();
  auto end = line.find(' ', start);
  if (end == std::string::npos) end = line.size();
  return line.substr(start, end - start);
}

}  // namespace

ReuseTrace ReuseTrace::read_csv(std::istream& is) {
  ReuseTrace trace;
  std::string line;
  bool header_seen = false;
  bool magic_seen = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# rnnmemo-trace", 0) == 0) {
      magic_seen = true;
      continue;
    }
    if (line.rfind("# policy=", 0) == 0) {
      trace.policy = policy_kind_from_name(meta_value(line, "policy"));
      trace.theta = std::stod(meta_value(line, "theta"));
      trace.throttle = meta_value(line, "throttle") == "1";
      trace.sequences = static_cast<std::uint32_t>(std::stoul(meta_value(line, "sequences")));
      continue;
    }
    if (line.rfind("# gate", 0) == 0) {
      TraceGateInfo g;
      g.layer = static_cast<std::uint16_t>(std::stoul(meta_value(line, "layer")));
      g.dir = static_cast<std::uint8_t>(std::stoul(meta_value(line, "dir")));
      g.gate = static_cast<std::uint8_t>(std::stoul(meta_value(line, "gate")));
      g.gate_name = meta_value(line, "name");
      g.neurons = static_cast<std::uint32_t>(std::stoul(meta_value(line, "neurons")));
      g.fan_in_forward = static_cast<std::uint32_t>(std::stoul(meta_value(line, "F")));
      g.fan_in_recurrent = static_cast<std::uint32_t>(std::stoul(meta_value(line, "R")));
      trace.gates.push_back(std::move(g));
      continue;
    }
    if (line[0] == '#') continue;
    if (!header_seen) {
      if (line != "sequence,timestep,layer,dir,gate,neuron,hit") {
        throw ValidationError("trace: unexpected CSV header: " + line);
      }
      header_seen = true;
      continue;
    }
    TraceRecord r;
    std::istringstream ss(line);
    char comma;
    unsigned long seq, t, layer, dir, gate, neuron, hit;
    ss >> seq >> comma >> t >> comma >> layer >> comma >> dir >> comma >> gate >>
        comma >> neuron >> comma >> hit;
    if (ss.fail()) throw ValidationError("trace: malformed CSV row: " + line);
    r.sequence = static_cast<std::uint32_t>(seq);
    r.timestep = static_cast<std::uint32_t>(t);
    r.layer = static_cast<std::uint16_t>(layer);
    r.dir = static_cast<std::uint8_t>(dir);
    r.gate = static_cast<std::uint8_t>(gate);
    r.neuron = static_cast<std::uint32_t>(neuron);
    r.hit = static_cast<std::uint8_t>(hit);
    trace.add(r);
  }
  if (!magic_seen) throw ValidationError("trace: not a rnnmemo trace file");
  trace.validate();
  return trace;
}

nlohmann::json ReuseTrace::to_json() const {
  nlohmann::json gates_json = nlohmann::json::array();
  for (const TraceGateInfo& g : gates) {
    gates_json.push_back({{"layer", g.layer},
                          {"dir", g.dir},
                          {"gate", g.gate},
                          {"name", g.gate_name},
                          {"neurons", g.neurons},
                          {"F", g.fan_in_forward},
                          {"R", g.fan_in_recurrent}});
  }
  nlohmann::json records_json = nlohmann::json::array();
  for (const TraceRecord& r : records) {
    records_json.push_back({r.sequence, r.timestep, r.layer, r.dir, r.gate, r.neuron, r.hit});
  }
  return {{"policy", policy_kind_name(policy)},
          {"theta", theta},
          {"throttle", throttle},
          {"sequences", sequences},
          {"gates", gates_json},
          {"record_fields", {"sequence", "timestep", "layer", "dir", "gate", "neuron", "hit"}},
          {"records", records_json}};
}

}  // namespace rnnmemo
