/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <string>

namespace rigidreg::commands {

/// Errors: std::invalid_argument for misuse (bad config, bad flags),
/// std::runtime_error for IO and execution failures. Every command writes a
/// manifest listing its inputs, outputs and per-stage timings; re-running
/// from that manifest reproduces the primary outputs bit-identically.

struct GenerateOptions {
  std::string kind = "gaussian_blobs";
  int n = 256;
  int count = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void generate(const GenerateOptions& opts);

struct TrainOptions {
  std::string config_json;         // full run config document
  std::string data_dir;            // optional override of config.data
  std::string out_checkpoint;
  std::string resume_checkpoint;   // optional
};

void train(const TrainOptions& opts);

struct RegisterOptions {
  std::string checkpoint;   // may be empty for the icp registrar
  std::string src_path;
  std::string dst_path;
  std::string registrar = "consensus";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_json;
  std::string dump_dir;     // optional correspondence/experiment dumps
};

void register_clouds(const RegisterOptions& opts);

void bench(const std::string& config_json, const std::string& out_dir);

/// Runs the full method plus the six switch-off modes on the same seed and
/// data, writing a comparison table.
void ablate(const std::string& config_json, const std::string& out_dir);

/// Re-executes the command recorded in a manifest. A non-empty out_override
/// redirects the primary output path (directory or file, per the command).
void rerun(const std::string& manifest_path, const std::string& out_override = "");

}  // namespace rigidreg::commands
