/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rigidreg {

inline constexpr const char* kToolVersion = "rigidreg 0.1.0";

/// Record of one command execution: the resolved options, every input
/// digest and every emitted artifact. Re-running a command from its
/// manifest reproduces the primary outputs bit-identically; only the
/// timings differ between runs.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::string options_json;  // resolved options/config snapshot
  std::uint64_t seed = 0;
  bool clouds_centered = true;  // synthetic clouds are centered at generation
  std::vector<std::pair<std::string, std::string>> inputs;  // path, fnv1a64 hex
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, double>> timings_ms;

  void add_input(const std::string& path);

  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

/// FNV-1a 64-bit digest, hex encoded. Content fingerprint for manifests,
/// not a cryptographic hash.
std::string fnv1a64_hex(const void* data, std::size_t len);
std::string fnv1a64_file(const std::string& path);

/// Wall-clock helper for the per-stage timings.
class StageTimer {
 public:
  explicit StageTimer(RunManifest& manifest) : manifest_(manifest) {}
  void record(const std::string& stage, double ms) { manifest_.timings_ms.emplace_back(stage, ms); }

  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn);

 private:
  RunManifest& manifest_;
};

}  // namespace rigidreg

#include <chrono>

namespace rigidreg {

template <typename Fn>
auto StageTimer::time(const std::string& stage, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  if constexpr (std::is_void_v<decltype(fn())>) {
    fn();
    const auto end = std::chrono::steady_clock::now();
    record(stage, std::chrono::duration<double, std::milli>(end - start).count());
  } else {
    auto result = fn();
    const auto end = std::chrono::steady_clock::now();
    record(stage, std::chrono::duration<double, std::milli>(end - start).count());
    return result;
  }
}

}  // namespace rigidreg
