/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/fen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rigidreg {

GraphMode parse_graph_mode(const std::string& name) {
  if (name == "static") return GraphMode::kStatic;
  if (name == "dynamic") return GraphMode::kDynamic;
  throw std::invalid_argument("unknown graph mode: " + name);
}

std::string graph_mode_name(GraphMode mode) {
  return mode == GraphMode::kStatic ? "static" : "dynamic";
}

void FenConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw std::invalid_argument(std::string("FenConfig: ") + what + " must be >= 1");
  };
  positive(in_channels, "in_channels");
  positive(edge_hidden, "edge_hidden");
  positive(l1, "l1");
  positive(l2, "l2");
  positive(fusion_hidden, "fusion_hidden");
  positive(k_graph, "k_graph");
  if (l3 < 4) throw std::invalid_argument("FenConfig: l3 must be >= 4");
}

NamedTensor& FenModel::param(std::string_view name) {
  for (auto& t : params)
    if (t.name == name) return t;
  throw std::invalid_argument("FenModel: no parameter named " + std::string(name));
}

const NamedTensor& FenModel::param(std::string_view name) const {
  for (const auto& t : params)
    if (t.name == name) return t;
  throw std::invalid_argument("FenModel: no parameter named " + std::string(name));
}

NamedTensor& FenModel::grad(std::string_view name) {
  for (auto& t : grads)
    if (t.name == name) return t;
  throw std::invalid_argument("FenModel: no gradient named " + std::string(name));
}

std::int64_t FenModel::param_count() const {
  std::int64_t n = 0;
  for (const auto& t : params) n += static_cast<std::int64_t>(t.rows) * t.cols;
  return n;
}

void FenModel::zero_grads() {
  for (auto& g : grads) std::fill(g.v.begin(), g.v.end(), 0.0);
}

FenModel fen_init(const FenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  FenModel model;
  model.cfg = cfg;
  Rng rng(derive_seed(seed, 0xfe17u));

  auto add = [&](const std::string& name, int rows, int cols, bool is_weight) {
    NamedTensor t(name, rows, cols);
    if (is_weight) {
      const double s = std::sqrt(6.0 / (rows + cols));
      for (double& v : t.v) v = rng.uniform(-s, s);
    }
    model.params.push_back(std::move(t));
  };

  add("loc.e1.w", cfg.edge_hidden, cfg.in_channels, true);
  add("loc.e1.b", 1, cfg.edge_hidden, false);
  add("loc.e2.w", cfg.l1, 2 * cfg.edge_hidden, true);
  add("loc.e2.b", 1, cfg.l1, false);
  if (cfg.use_global_branch) {
    add("glob.e1.w", cfg.edge_hidden, cfg.in_channels, true);
    add("glob.e1.b", 1, cfg.edge_hidden, false);
    add("glob.e2.w", cfg.l2, 2 * cfg.edge_hidden, true);
    add("glob.e2.b", 1, cfg.l2, false);
  }
  add("fuse.d1.w", cfg.fusion_hidden, cfg.fusion_in(), true);
  add("fuse.d1.b", 1, cfg.fusion_hidden, false);
  add("fuse.d2.w", cfg.l3, cfg.fusion_hidden, true);
  add("fuse.d2.b", 1, cfg.l3, false);

  model.grads.reserve(model.params.size());
  for (const auto& p : model.params) model.grads.emplace_back(p.name, p.rows, p.cols);
  return model;
}

namespace {

double leaky(double z) { return z >= 0.0 ? z : kLeakySlope * z; }
// The activation is sign-preserving, so the slope can be read off the output.
double slope_from_output(double a) { return a >= 0.0 ? 1.0 : kLeakySlope; }

/// Exact k-NN in feature space (used by the dynamic graph mode), brute
/// force with (distance, index) tie order matching the spatial index.
NeighborhoodIndex feature_knn(const Matrix& f, int k) {
  const int n = f.rows();
  if (k < 1 || k >= n) throw std::invalid_argument("feature_knn: k out of range");
  NeighborhoodIndex idx;
  idx.k = k;
  idx.flat.resize(static_cast<std::size_t>(n) * k);
  std::vector<std::pair<double, int>> dist(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < f.cols(); ++c) {
        const double d = f(i, c) - f(j, c);
        d2 += d * d;
      }
      dist[j] = {d2, j};
    }
    dist[i].first = std::numeric_limits<double>::infinity();  // exclude self
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (int j = 0; j < k; ++j) idx.flat[static_cast<std::size_t>(i) * k + j] = dist[j].second;
  }
  return idx;
}

/// First edge layer: per-(point, neighbor) dense map over the descriptor
/// channels, leaky activation, channelwise max over neighbors.
void edge_layer1(const DescriptorTensor& desc, const NamedTensor& w, const NamedTensor& b,
                 FenCache::EdgeLayer& cache) {
  const int n = desc.values.n, k = desc.values.k, c_in = desc.values.c;
  const int width = w.rows;

  cache.graph = desc.nbr;
  cache.out = Matrix(n, width);
  cache.argmax.assign(static_cast<std::size_t>(n) * width, 0);

  std::vector<double> z(width);
  for (int i = 0; i < n; ++i) {
    auto out_row = cache.out.row(i);
    int* am = cache.argmax.data() + static_cast<std::size_t>(i) * width;
    for (int j = 0; j < k; ++j) {
      const auto x = desc.values.slot(i, j);
      for (int c = 0; c < width; ++c) {
        const double* wr = w.v.data() + static_cast<std::size_t>(c) * c_in;
        double acc = b.v[c];
        for (int t = 0; t < c_in; ++t) acc += wr[t] * x[t];
        z[c] = leaky(acc);
      }
      if (j == 0) {
        std::copy(z.begin(), z.end(), out_row.begin());
      } else {
        for (int c = 0; c < width; ++c)
          if (z[c] > out_row[c]) {
            out_row[c] = z[c];
            am[c] = j;
          }
      }
    }
  }
}

/// Deeper edge layer on per-point features: edge vector [f_j - f_i | f_i],
/// dense map, activation, max over the graph row.
void edge_layer2(const Matrix& f, const NeighborhoodIndex& graph, const NamedTensor& w,
                 const NamedTensor& b, FenCache::EdgeLayer& cache) {
  const int n = f.rows(), win = f.cols(), k = graph.k;
  const int width = w.rows;

  cache.input = f;
  cache.graph = graph;
  cache.out = Matrix(n, width);
  cache.argmax.assign(static_cast<std::size_t>(n) * width, 0);

  std::vector<double> edge(2 * win);
  std::vector<double> z(width);
  for (int i = 0; i < n; ++i) {
    const auto fi = f.row(i);
    auto out_row = cache.out.row(i);
    int* am = cache.argmax.data() + static_cast<std::size_t>(i) * width;
    const auto row = graph.row(i);
    for (int j = 0; j < k; ++j) {
      const auto fj = f.row(row[j]);
      for (int t = 0; t < win; ++t) {
        edge[t] = fj[t] - fi[t];
        edge[win + t] = fi[t];
      }
      for (int c = 0; c < width; ++c) {
        const double* wr = w.v.data() + static_cast<std::size_t>(c) * 2 * win;
        double acc = b.v[c];
        for (int t = 0; t < 2 * win; ++t) acc += wr[t] * edge[t];
        z[c] = leaky(acc);
      }
      if (j == 0) {
        std::copy(z.begin(), z.end(), out_row.begin());
      } else {
        for (int c = 0; c < width; ++c)
          if (z[c] > out_row[c]) {
            out_row[c] = z[c];
            am[c] = j;
          }
      }
    }
  }
}

void run_branch(const FenModel& model, const DescriptorTensor& desc,
                const NeighborhoodIndex& static_graph, const char* prefix,
                FenCache::Branch& cache) {
  const FenConfig& cfg = model.cfg;
  const std::string p(prefix);
  edge_layer1(desc, model.param(p + ".e1.w"), model.param(p + ".e1.b"), cache.e1);

  const NeighborhoodIndex graph = cfg.graph_mode == GraphMode::kStatic
                                      ? static_graph
                                      : feature_knn(cache.e1.out, cfg.k_graph);
  edge_layer2(cache.e1.out, graph, model.param(p + ".e2.w"), model.param(p + ".e2.b"), cache.e2);
}

void edge_layer2_backward(const FenCache::EdgeLayer& layer, const NamedTensor& w, NamedTensor& dw,
                          NamedTensor& db, const Matrix& upstream, Matrix& d_input) {
  const Matrix& f = layer.input;
  const int n = f.rows(), win = f.cols(), width = w.rows;
  d_input = Matrix(n, win);

  std::vector<double> edge(2 * win);
  for (int i = 0; i < n; ++i) {
    const auto fi = f.row(i);
    const int* am = layer.argmax.data() + static_cast<std::size_t>(i) * width;
    auto d_fi = d_input.row(i);
    for (int c = 0; c < width; ++c) {
      const double g = upstream(i, c);
      if (g == 0.0) continue;
      const double dz = g * slope_from_output(layer.out(i, c));
      const int nbr = layer.graph.row(i)[am[c]];
      const auto fj = f.row(nbr);
      for (int t = 0; t < win; ++t) {
        edge[t] = fj[t] - fi[t];
        edge[win + t] = fi[t];
      }
      double* dwr = dw.v.data() + static_cast<std::size_t>(c) * 2 * win;
      for (int t = 0; t < 2 * win; ++t) dwr[t] += dz * edge[t];
      db.v[c] += dz;

      const double* wr = w.v.data() + static_cast<std::size_t>(c) * 2 * win;
      auto d_fj = d_input.row(nbr);
      for (int t = 0; t < win; ++t) {
        d_fj[t] += dz * wr[t];
        d_fi[t] += dz * (wr[win + t] - wr[t]);
      }
    }
  }
}

void edge_layer1_backward(const DescriptorTensor& desc, const FenCache::EdgeLayer& layer,
                          NamedTensor& dw, NamedTensor& db, const Matrix& upstream) {
  const int n = desc.values.n, c_in = desc.values.c;
  const int width = static_cast<int>(db.v.size());
  for (int i = 0; i < n; ++i) {
    const int* am = layer.argmax.data() + static_cast<std::size_t>(i) * width;
    for (int c = 0; c < width; ++c) {
      const double g = upstream(i, c);
      if (g == 0.0) continue;
      const double dz = g * slope_from_output(layer.out(i, c));
      const auto x = desc.values.slot(i, am[c]);
      double* dwr = dw.v.data() + static_cast<std::size_t>(c) * c_in;
      for (int t = 0; t < c_in; ++t) dwr[t] += dz * x[t];
      db.v[c] += dz;
    }
  }
}

}  // namespace

Matrix fen_forward(const FenModel& model, const DescriptorTensor& features,
                   const PointCloud& cloud, FenCache* cache_out) {
  const FenConfig& cfg = model.cfg;
  if (features.channels() != cfg.in_channels)
    throw std::invalid_argument("fen_forward: descriptor channels do not match config");
  if (features.values.n != static_cast<int>(cloud.size()))
    throw std::invalid_argument("fen_forward: descriptor rows do not match cloud size");
  if (cfg.k_graph >= static_cast<int>(cloud.size()))
    throw std::invalid_argument("fen_forward: k_graph too large for cloud");

  FenCache cache;
  cache.desc = features;

  // Both branches share the cloud's Euclidean graph in static mode.
  NeighborhoodIndex static_graph;
  if (cfg.graph_mode == GraphMode::kStatic) {
    static_graph = features.nbr.k == cfg.k_graph ? features.nbr : knn(cloud, cfg.k_graph);
  }

  run_branch(model, features, static_graph, "loc", cache.loc);

  const int n = features.values.n;
  if (cfg.use_global_branch) {
    run_branch(model, features, static_graph, "glob", cache.glob);
    cache.h_glob.assign(cfg.l2, 0.0);
    cache.glob_argmax.assign(cfg.l2, 0);
    const Matrix& g = cache.glob.e2.out;
    for (int c = 0; c < cfg.l2; ++c) {
      double best = g(0, c);
      int best_i = 0;
      for (int i = 1; i < n; ++i)
        if (g(i, c) > best) {
          best = g(i, c);
          best_i = i;
        }
      cache.h_glob[c] = best;
      cache.glob_argmax[c] = best_i;
    }
  }

  cache.fuse_in = Matrix(n, cfg.fusion_in());
  for (int i = 0; i < n; ++i) {
    auto dst = cache.fuse_in.row(i);
    const auto loc = cache.loc.e2.out.row(i);
    std::copy(loc.begin(), loc.end(), dst.begin());
    if (cfg.use_global_branch)
      std::copy(cache.h_glob.begin(), cache.h_glob.end(), dst.begin() + cfg.l1);
  }

  const NamedTensor& w3 = model.param("fuse.d1.w");
  const NamedTensor& b3 = model.param("fuse.d1.b");
  cache.a3 = Matrix(n, cfg.fusion_hidden);
  for (int i = 0; i < n; ++i) {
    const auto u = cache.fuse_in.row(i);
    auto a = cache.a3.row(i);
    for (int c = 0; c < cfg.fusion_hidden; ++c) {
      const double* wr = w3.v.data() + static_cast<std::size_t>(c) * w3.cols;
      double acc = b3.v[c];
      for (int t = 0; t < w3.cols; ++t) acc += wr[t] * u[t];
      a[c] = leaky(acc);
    }
  }

  const NamedTensor& w4 = model.param("fuse.d2.w");
  const NamedTensor& b4 = model.param("fuse.d2.b");
  cache.embedding = Matrix(n, cfg.l3);
  for (int i = 0; i < n; ++i) {
    const auto a = cache.a3.row(i);
    auto h = cache.embedding.row(i);
    for (int c = 0; c < cfg.l3; ++c) {
      const double* wr = w4.v.data() + static_cast<std::size_t>(c) * w4.cols;
      double acc = b4.v[c];
      for (int t = 0; t < w4.cols; ++t) acc += wr[t] * a[t];
      h[c] = acc;
    }
  }

  Matrix embedding = cache.embedding;
  if (cache_out) *cache_out = std::move(cache);
  return embedding;
}

void fen_backward(FenModel& model, const FenCache& cache, const Matrix& d_embedding,
                  bool accumulate) {
  const FenConfig& cfg = model.cfg;
  const int n = cache.embedding.rows();
  if (!d_embedding.same_shape(cache.embedding))
    throw std::invalid_argument("fen_backward: upstream gradient shape mismatch");
  if (cache.desc.channels() != cfg.in_channels)
    throw std::invalid_argument("fen_backward: cache does not match model config");

  if (!accumulate) model.zero_grads();

  // Final linear layer.
  const NamedTensor& w4 = model.param("fuse.d2.w");
  NamedTensor& dw4 = model.grad("fuse.d2.w");
  NamedTensor& db4 = model.grad("fuse.d2.b");
  Matrix d_a3(n, cfg.fusion_hidden);
  for (int i = 0; i < n; ++i) {
    const auto a = cache.a3.row(i);
    auto da = d_a3.row(i);
    for (int c = 0; c < cfg.l3; ++c) {
      const double g = d_embedding(i, c);
      if (g == 0.0) continue;
      double* dwr = dw4.v.data() + static_cast<std::size_t>(c) * w4.cols;
      for (int t = 0; t < w4.cols; ++t) dwr[t] += g * a[t];
      db4.v[c] += g;
      const double* wr = w4.v.data() + static_cast<std::size_t>(c) * w4.cols;
      for (int t = 0; t < w4.cols; ++t) da[t] += g * wr[t];
    }
  }

  // First dense layer.
  const NamedTensor& w3 = model.param("fuse.d1.w");
  NamedTensor& dw3 = model.grad("fuse.d1.w");
  NamedTensor& db3 = model.grad("fuse.d1.b");
  Matrix d_fuse(n, cfg.fusion_in());
  for (int i = 0; i < n; ++i) {
    const auto u = cache.fuse_in.row(i);
    auto du = d_fuse.row(i);
    for (int c = 0; c < cfg.fusion_hidden; ++c) {
      const double dz = d_a3(i, c) * slope_from_output(cache.a3(i, c));
      if (dz == 0.0) continue;
      double* dwr = dw3.v.data() + static_cast<std::size_t>(c) * w3.cols;
      for (int t = 0; t < w3.cols; ++t) dwr[t] += dz * u[t];
      db3.v[c] += dz;
      const double* wr = w3.v.data() + static_cast<std::size_t>(c) * w3.cols;
      for (int t = 0; t < w3.cols; ++t) du[t] += dz * wr[t];
    }
  }

  // Split the fused gradient back into the two branches.
  Matrix d_loc(n, cfg.l1);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < cfg.l1; ++c) d_loc(i, c) = d_fuse(i, c);

  Matrix d_loc_e1;
  edge_layer2_backward(cache.loc.e2, model.param("loc.e2.w"), model.grad("loc.e2.w"),
                       model.grad("loc.e2.b"), d_loc, d_loc_e1);
  edge_layer1_backward(cache.desc, cache.loc.e1, model.grad("loc.e1.w"), model.grad("loc.e1.b"),
                       d_loc_e1);

  if (cfg.use_global_branch) {
    // Global pooling routes each channel's gradient to the winning point.
    Matrix d_glob(n, cfg.l2);
    for (int c = 0; c < cfg.l2; ++c) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += d_fuse(i, cfg.l1 + c);
      d_glob(cache.glob_argmax[c], c) = acc;
    }
    Matrix d_glob_e1;
    edge_layer2_backward(cache.glob.e2, model.param("glob.e2.w"), model.grad("glob.e2.w"),
                         model.grad("glob.e2.b"), d_glob, d_glob_e1);
    edge_layer1_backward(cache.desc, cache.glob.e1, model.grad("glob.e1.w"),
                         model.grad("glob.e1.b"), d_glob_e1);
  }
}

AdamState adam_init(const FenModel& model) {
  AdamState st;
  st.m.reserve(model.params.size());
  st.v.reserve(model.params.size());
  for (const auto& p : model.params) {
    st.m.emplace_back(p.name, p.rows, p.cols);
    st.v.emplace_back(p.name, p.rows, p.cols);
  }
  return st;
}

void adam_step(FenModel& model, AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  if (state.m.size() != model.params.size())
    throw std::invalid_argument("adam_step: state does not match model");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < model.params.size(); ++t) {
    auto& p = model.params[t].v;
    const auto& g = model.grads[t].v;
    auto& m = state.m[t].v;
    auto& v = state.v[t].v;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }
}

std::uint64_t nondiff_pattern_hash(const FenCache& cache) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  auto mix_layer = [&](const FenCache::EdgeLayer& l) {
    for (int i : l.argmax) mix(static_cast<std::uint64_t>(i) + 1);
    for (int i = 0; i < l.out.rows(); ++i)
      for (double v : l.out.row(i)) mix(v >= 0.0 ? 2u : 3u);
    for (int g : l.graph.flat) mix(static_cast<std::uint64_t>(g) + 5);
  };
  mix_layer(cache.loc.e1);
  mix_layer(cache.loc.e2);
  if (!cache.h_glob.empty()) {
    mix_layer(cache.glob.e1);
    mix_layer(cache.glob.e2);
    for (int i : cache.glob_argmax) mix(static_cast<std::uint64_t>(i) + 7);
  }
  for (int i = 0; i < cache.a3.rows(); ++i)
    for (double v : cache.a3.row(i)) mix(v >= 0.0 ? 11u : 13u);
  return h;
}

}  // namespace rigidreg
