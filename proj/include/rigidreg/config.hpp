/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rigidreg/geom.hpp"
#include "rigidreg/trainer.hpp"

namespace rigidreg {

/// Where a run gets its clouds. Either synthetic shapes drawn per seed, or
/// files from a directory (sorted by name; the last eval_count files are the
/// held-out split unless eval_dir is given).
struct DataSpec {
  enum class Source { kGenerate, kDir };
  Source source = Source::kGenerate;
  std::string dir;       // train files when source == kDir
  std::string eval_dir;  // optional separate held-out directory

  // Generation parameters. `mix` holds (kind, weight) pairs.
  std::vector<std::pair<ShapeKind, double>> mix = {{ShapeKind::kGaussianBlobs, 1.0}};
  int n_points = 256;
  int count = 100;
  int eval_count = 25;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::kNoiseSigma;
  std::vector<double> grid;
};

struct BenchSpec {
  std::vector<SweepSpec> sweeps;
  bool include_icp = true;
};

/// The single JSON document every command consumes.
struct RunConfig {
  TrainConfig train;
  DataSpec data;
  BenchSpec bench;
};

/// Strict parse: unknown or ill-typed keys raise std::invalid_argument
/// naming the offending key. Missing keys take defaults.
RunConfig run_config_from_json(const std::string& text);

/// Fully-resolved snapshot; parsing it back yields the same config.
std::string run_config_to_json(const RunConfig& cfg);

/// Materializes the training and held-out clouds described by the spec.
/// Deterministic per (spec, seed).
void load_datasets(const DataSpec& spec, std::uint64_t seed,
                   std::vector<PointCloud>& train_shapes, std::vector<PointCloud>& eval_shapes);

}  // namespace rigidreg
