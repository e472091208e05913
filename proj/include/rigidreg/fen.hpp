/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rigidreg/descriptors.hpp"
#include "rigidreg/geom.hpp"
#include "rigidreg/matrix.hpp"

namespace rigidreg {

enum class GraphMode { kStatic, kDynamic };

GraphMode parse_graph_mode(const std::string& name);
std::string graph_mode_name(GraphMode mode);

/// Architecture of the feature extraction network. Two edge-convolution
/// layers per branch; the local branch keeps per-point features, the global
/// branch pools over points, and the fused vector runs through two dense
/// layers (the last one linear).
struct FenConfig {
  int in_channels = 7;     // 7 RI channels or 6 Cartesian
  int edge_hidden = 64;    // width after the first edge layer, both branches
  int l1 = 64;             // local feature width
  int l2 = 64;             // global feature width
  int l3 = 32;             // embedding width
  int fusion_hidden = 64;
  int k_graph = 16;        // neighbors per edge-convolution
  GraphMode graph_mode = GraphMode::kStatic;
  bool use_global_branch = true;

  void validate() const;
  int fusion_in() const { return use_global_branch ? l1 + l2 : l1; }
};

struct NamedTensor {
  std::string name;
  int rows = 0, cols = 0;
  std::vector<double> v;

  NamedTensor() = default;
  NamedTensor(std::string name, int rows, int cols)
      : name(std::move(name)), rows(rows), cols(cols),
        v(static_cast<std::size_t>(rows) * cols, 0.0) {}

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const double> row(int r) const {
    return {v.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
};

/// Parameters and matching gradient buffers.
struct FenModel {
  FenConfig cfg;
  std::vector<NamedTensor> params;
  std::vector<NamedTensor> grads;

  NamedTensor& param(std::string_view name);
  const NamedTensor& param(std::string_view name) const;
  NamedTensor& grad(std::string_view name);

  std::int64_t param_count() const;
  void zero_grads();
};

/// Deterministic initialization: weights uniform in [-s, s] with
/// s = sqrt(6 / (fan_in + fan_out)), biases zero.
FenModel fen_init(const FenConfig& cfg, std::uint64_t seed);

/// Everything the backward pass needs, captured by value.
struct FenCache {
  struct EdgeLayer {
    Matrix input;             // per-point input features (layers >= 2)
    NeighborhoodIndex graph;  // neighbor rows used by this layer
    Matrix out;               // pooled post-activation output, N x width
    std::vector<int> argmax;  // winning neighbor slot per (point, channel)
  };
  struct Branch {
    EdgeLayer e1, e2;
  };

  DescriptorTensor desc;
  Branch loc, glob;
  std::vector<int> glob_argmax;   // winning point per global channel
  std::vector<double> h_glob;
  Matrix fuse_in;
  Matrix a3;                      // post-activation of the first dense layer
  Matrix embedding;
};

/// Embedding of one cloud. `features` must match cfg.in_channels; the cloud
/// is needed for the static Euclidean graph. The cache, when requested, is
/// self-contained and may outlive both inputs.
Matrix fen_forward(const FenModel& model, const DescriptorTensor& features,
                   const PointCloud& cloud, FenCache* cache = nullptr);

/// Gradients of a scalar loss with upstream d_embedding. Overwrites the
/// model's gradient buffers unless accumulate is set. Throws when the cache
/// shape does not match the model.
void fen_backward(FenModel& model, const FenCache& cache, const Matrix& d_embedding,
                  bool accumulate = false);

struct AdamState {
  std::vector<NamedTensor> m, v;
  std::int64_t step = 0;
};

AdamState adam_init(const FenModel& model);

/// Standard Adam update with bias correction, consuming model.grads.
void adam_step(FenModel& model, AdamState& state, double lr, double beta1, double beta2,
               double eps);

/// Hash of every non-smooth decision taken during the forward pass (pool
/// winners, activation signs, dynamic graphs). Two probes with different
/// hashes straddle a kink and must not be compared by finite differences.
std::uint64_t nondiff_pattern_hash(const FenCache& cache);

inline constexpr double kLeakySlope = 0.01;

}  // namespace rigidreg
