/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rigidreg {

using nlohmann::json;

namespace {

json fen_config_json(const FenConfig& cfg) {
  return json{{"in_channels", cfg.in_channels},
              {"edge_hidden", cfg.edge_hidden},
              {"l1", cfg.l1},
              {"l2", cfg.l2},
              {"l3", cfg.l3},
              {"fusion_hidden", cfg.fusion_hidden},
              {"k_graph", cfg.k_graph},
              {"graph_mode", graph_mode_name(cfg.graph_mode)},
              {"use_global_branch", cfg.use_global_branch}};
}

FenConfig fen_config_parse(const json& j) {
  FenConfig cfg;
  try {
    cfg.in_channels = j.at("in_channels").get<int>();
    cfg.edge_hidden = j.at("edge_hidden").get<int>();
    cfg.l1 = j.at("l1").get<int>();
    cfg.l2 = j.at("l2").get<int>();
    cfg.l3 = j.at("l3").get<int>();
    cfg.fusion_hidden = j.at("fusion_hidden").get<int>();
    cfg.k_graph = j.at("k_graph").get<int>();
    cfg.graph_mode = parse_graph_mode(j.at("graph_mode").get<std::string>());
    cfg.use_global_branch = j.at("use_global_branch").get<bool>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("fen config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void write_tensor(std::ofstream& out, const NamedTensor& t) {
  const std::uint32_t name_len = static_cast<std::uint32_t>(t.name.size());
  out.write(reinterpret_cast<const char*>(&name_len), sizeof name_len);
  out.write(t.name.data(), name_len);
  const std::int32_t rows = t.rows, cols = t.cols;
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

NamedTensor read_tensor(std::ifstream& in, const std::string& path) {
  std::uint32_t name_len = 0;
  in.read(reinterpret_cast<char*>(&name_len), sizeof name_len);
  if (!in || name_len > 4096) throw std::runtime_error(path + ": corrupt tensor header");
  std::string name(name_len, '\0');
  in.read(name.data(), name_len);
  std::int32_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows < 0 || cols < 0 || static_cast<std::int64_t>(rows) * cols > (1 << 28))
    throw std::runtime_error(path + ": corrupt tensor shape");
  NamedTensor t(name, rows, cols);
  in.read(reinterpret_cast<char*>(t.v.data()),
          static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated tensor data");
  return t;
}

}  // namespace

std::string fen_config_to_json(const FenConfig& cfg) { return fen_config_json(cfg).dump(); }

FenConfig fen_config_from_json(const std::string& json_text) {
  return fen_config_parse(json::parse(json_text));
}

void save_checkpoint(const std::string& path, const FenModel& model, std::int64_t steps,
                     const AdamState* adam, const std::string& extra_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");

  json header{{"config", fen_config_json(model.cfg)},
              {"steps", steps},
              {"has_adam", adam != nullptr},
              {"adam_step", adam ? adam->step : 0},
              {"tensor_count", model.params.size()},
              {"extra", extra_json.empty() ? json(nullptr) : json::parse(extra_json)}};
  const std::string header_text = header.dump();

  out << kCheckpointMagic << "\n";
  const std::uint32_t hlen = static_cast<std::uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  out.write(header_text.data(), hlen);

  for (const auto& t : model.params) write_tensor(out, t);
  if (adam) {
    for (const auto& t : adam->m) write_tensor(out, t);
    for (const auto& t : adam->v) write_tensor(out, t);
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");

  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic)
    throw std::runtime_error(path + ": not a " + kCheckpointMagic + " checkpoint");

  std::uint32_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  if (!in || hlen > (1u << 20)) throw std::runtime_error(path + ": corrupt header");
  std::string header_text(hlen, '\0');
  in.read(header_text.data(), hlen);

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": bad header json: " + e.what());
  }

  Checkpoint ck;
  ck.model.cfg = fen_config_parse(header.at("config"));
  ck.steps = header.at("steps").get<std::int64_t>();
  ck.has_adam = header.at("has_adam").get<bool>();
  if (header.contains("extra") && !header.at("extra").is_null())
    ck.extra_json = header.at("extra").dump();
  const std::size_t count = header.at("tensor_count").get<std::size_t>();

  for (std::size_t i = 0; i < count; ++i) ck.model.params.push_back(read_tensor(in, path));
  ck.model.grads.reserve(count);
  for (const auto& p : ck.model.params) ck.model.grads.emplace_back(p.name, p.rows, p.cols);

  if (ck.has_adam) {
    ck.adam.step = header.at("adam_step").get<std::int64_t>();
    for (std::size_t i = 0; i < count; ++i) ck.adam.m.push_back(read_tensor(in, path));
    for (std::size_t i = 0; i < count; ++i) ck.adam.v.push_back(read_tensor(in, path));
  }
  return ck;
}

}  // namespace rigidreg
