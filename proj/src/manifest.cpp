/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rigidreg {

using nlohmann::json;

std::string fnv1a64_hex(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for digest");
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (got < static_cast<std::streamsize>(sizeof buf)) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void RunManifest::add_input(const std::string& path) {
  inputs.emplace_back(path, fnv1a64_file(path));
}

void RunManifest::save(const std::string& path) const {
  json in = json::array();
  for (const auto& [p, digest] : inputs) in.push_back({{"path", p}, {"fnv1a64", digest}});
  json timings = json::object();
  for (const auto& [stage, ms] : timings_ms) timings[stage] = ms;

  json j{{"tool_version", tool_version},
         {"command", command},
         {"options", json::parse(options_json.empty() ? "{}" : options_json)},
         {"seed", seed},
         {"clouds_centered", clouds_centered},
         {"inputs", in},
         {"outputs", outputs},
         {"timings_ms", timings}};

  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": bad manifest json: " + e.what());
  }

  RunManifest m;
  try {
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.options_json = j.at("options").dump();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.clouds_centered = j.value("clouds_centered", true);
    for (const auto& entry : j.at("inputs"))
      m.inputs.emplace_back(entry.at("path").get<std::string>(),
                            entry.at("fnv1a64").get<std::string>());
    for (const auto& entry : j.at("outputs")) m.outputs.push_back(entry.get<std::string>());
    for (const auto& [stage, ms] : j.at("timings_ms").items())
      m.timings_ms.emplace_back(stage, ms.get<double>());
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": manifest field missing: " + e.what());
  }
  return m;
}

}  // namespace rigidreg
