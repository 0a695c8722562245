#include "stlgail/io/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stlgail/error.hpp"

namespace stlgail::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json rows(const std::vector<double>& flat, std::size_t width, std::size_t n) {
  ordered_json out = ordered_json::array();
  for (std::size_t r = 0; r < n; ++r) {
    ordered_json row = ordered_json::array();
    for (std::size_t c = 0; c < width; ++c) row.push_back(flat[r * width + c]);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> flatten(const json& j, std::size_t width, const char* what,
                            std::size_t line) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array of rows", line);
  std::vector<double> out;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != width) {
      throw ParseError(std::string(what) + " rows must have one value per dimension", line);
    }
    for (const auto& v : row) {
      if (!v.is_number()) throw ParseError(std::string(what) + " must hold numbers", line);
      out.push_back(v.get<double>());
    }
  }
  return out;
}

LabeledTrajectory parse_line(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError("expected a JSON object", line);
  for (const char* key : {"id", "label", "agent_dims", "agent_states"}) {
    if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'", line);
  }
  LabeledTrajectory t;
  if (!j["id"].is_string()) throw ParseError("id must be a string", line);
  t.id = j["id"].get<std::string>();
  if (!j["label"].is_number_integer()) throw ParseError("label must be an integer", line);
  t.label = j["label"].get<int>();
  if (t.label != 1 && t.label != -1) throw ParseError("label must be +1 or -1", line);
  if (j.contains("dt") && !(j["dt"].is_number() && j["dt"].get<double>() == 1.0)) {
    throw ParseError("dt must be 1", line);
  }
  t.agent_dims = j["agent_dims"].get<std::vector<std::string>>();
  if (t.agent_dims.empty()) throw ParseError("agent_dims must not be empty", line);
  if (j.contains("env_dims")) t.env_dims = j["env_dims"].get<std::vector<std::string>>();
  t.agent_states = flatten(j["agent_states"], t.agent_dims.size(), "agent_states", line);
  if (t.agent_states.empty()) throw ParseError("agent_states must not be empty", line);
  if (!t.env_dims.empty()) {
    if (!j.contains("env_states")) throw ParseError("missing field 'env_states'", line);
    t.env_states = flatten(j["env_states"], t.env_dims.size(), "env_states", line);
    if (t.env_states.size() / t.env_dims.size() != t.length()) {
      throw ParseError("agent and environment states differ in length", line);
    }
  }
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw ParseError("meta must be an object", line);
    for (const auto& [k, v] : j["meta"].items()) {
      if (!v.is_string()) throw ParseError("meta values must be strings", line);
      t.meta[k] = v.get<std::string>();
    }
  }
  return t;
}

}  // namespace

std::string trajectory_to_json(const LabeledTrajectory& t) {
  ordered_json j;
  j["id"] = t.id;
  j["label"] = t.label;
  j["agent_dims"] = t.agent_dims;
  j["env_dims"] = t.env_dims;
  j["dt"] = 1;
  j["agent_states"] = rows(t.agent_states, t.agent_dims.size(), t.length());
  j["env_states"] = rows(t.env_states, t.env_dims.size(), t.env_dims.empty() ? 0 : t.length());
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : t.meta) meta[k] = v;
  j["meta"] = std::move(meta);
  return j.dump();
}

std::string dataset_to_jsonl(const Dataset& d) {
  std::string out;
  for (const auto& t : d) {
    out += trajectory_to_json(t);
    out += '\n';
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  Dataset out;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    LabeledTrajectory t;
    try {
      t = parse_line(json::parse(raw), line);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line);
    }
    if (!out.empty() && t.length() != out.front().length()) {
      throw InconsistentHorizon("line " + std::to_string(line) + ": horizon " +
                                std::to_string(t.horizon()) + " differs from " +
                                std::to_string(out.front().horizon()));
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_file(path, dataset_to_jsonl(d));
}

Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_file(path)); }

}  // namespace stlgail::io
