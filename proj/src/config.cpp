/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/config.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "rigidreg/io.hpp"

namespace rigidreg {

using nlohmann::json;

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config: key '" + key + "': " + why);
}

/// Pulls typed values out of one JSON object and rejects keys it never saw.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) bad_key(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      bad_key(path(key), "wrong type");
    }
  }

  void get_enum(const char* key, const std::function<void(const std::string&)>& apply) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_string()) bad_key(path(key), "expected a string");
    try {
      apply(j_.at(key).get<std::string>());
    } catch (const std::invalid_argument& e) {
      bad_key(path(key), e.what());
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& sub(const char* key) { return j_.at(key); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) bad_key(path(key), "unknown key");
  }

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void parse_model(const json& j, FenConfig& fen) {
  ObjectReader r(j, "model");
  r.get("edge_hidden", fen.edge_hidden);
  r.get("l1", fen.l1);
  r.get("l2", fen.l2);
  r.get("l3", fen.l3);
  r.get("fusion_hidden", fen.fusion_hidden);
  r.get("k_graph", fen.k_graph);
  r.get_enum("graph_mode", [&](const std::string& s) { fen.graph_mode = parse_graph_mode(s); });
  r.get("use_global_branch", fen.use_global_branch);
  r.finish();
}

void parse_train(const json& j, TrainConfig& t) {
  ObjectReader r(j, "train");
  r.get("epochs", t.epochs);
  r.get("lr", t.lr);
  r.get("beta1", t.beta1);
  r.get("beta2", t.beta2);
  r.get("eps", t.eps);
  r.get("q_fraction", t.q_fraction);
  r.get("k_descriptor", t.k_descriptor);
  r.get("k_loss", t.k_loss);
  r.get("m_p", t.m_p);
  r.get("m_n", t.m_n);
  r.get("rotation_range_deg", t.rotation_range_deg);
  r.get("translation_range", t.translation_range);
  r.get("noise_sigma", t.noise_sigma);
  r.get("use_ri", t.use_ri);
  r.get_enum("sampling_mode",
             [&](const std::string& s) { t.sampling_mode = parse_sampling_mode(s); });
  r.finish();
}

void parse_eval(const json& j, TrainConfig& t) {
  ObjectReader r(j, "eval");
  r.get_enum("registrar", [&](const std::string& s) { t.registrar = parse_registrar(s); });
  r.get("k_groups", t.k_groups);
  r.get("k_top", t.k_top);
  r.get("icp_max_iters", t.icp_max_iters);
  r.get("icp_tol", t.icp_tol);
  r.finish();
}

void parse_data(const json& j, DataSpec& d) {
  ObjectReader r(j, "data");
  r.get_enum("source", [&](const std::string& s) {
    if (s == "generate")
      d.source = DataSpec::Source::kGenerate;
    else if (s == "dir")
      d.source = DataSpec::Source::kDir;
    else
      throw std::invalid_argument("expected 'generate' or 'dir'");
  });
  r.get("dir", d.dir);
  r.get("eval_dir", d.eval_dir);
  r.get("n_points", d.n_points);
  r.get("count", d.count);
  r.get("eval_count", d.eval_count);
  if (r.has("kind")) {
    std::string kind;
    r.get("kind", kind);
    try {
      d.mix = {{parse_shape_kind(kind), 1.0}};
    } catch (const std::invalid_argument& e) {
      bad_key("data.kind", e.what());
    }
  }
  if (r.has("mix")) {
    const json& m = r.sub("mix");
    if (!m.is_array() || m.empty()) bad_key("data.mix", "expected a non-empty array");
    d.mix.clear();
    for (const auto& entry : m) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
          !entry[1].is_number())
        bad_key("data.mix", "entries must be [kind, weight] pairs");
      d.mix.emplace_back(parse_shape_kind(entry[0].get<std::string>()), entry[1].get<double>());
    }
  }
  r.finish();
}

void parse_bench(const json& j, BenchSpec& b) {
  ObjectReader r(j, "bench");
  r.get("include_icp", b.include_icp);
  if (r.has("sweeps")) {
    const json& s = r.sub("sweeps");
    if (!s.is_array()) bad_key("bench.sweeps", "expected an array");
    b.sweeps.clear();
    for (const auto& entry : s) {
      ObjectReader er(entry, "bench.sweeps[]");
      SweepSpec spec;
      er.get_enum("axis", [&](const std::string& n) { spec.axis = parse_sweep_axis(n); });
      std::vector<double> grid;
      er.get("grid", grid);
      spec.grid = std::move(grid);
      er.finish();
      if (spec.grid.empty()) bad_key("bench.sweeps[].grid", "must be non-empty");
      b.sweeps.push_back(std::move(spec));
    }
  }
  r.finish();
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  ObjectReader r(j, "");
  std::uint64_t seed = cfg.train.seed;
  r.get("seed", seed);
  cfg.train.seed = seed;
  r.get("threads", cfg.train.threads);
  if (r.has("model")) parse_model(r.sub("model"), cfg.train.fen);
  if (r.has("train")) parse_train(r.sub("train"), cfg.train);
  if (r.has("eval")) parse_eval(r.sub("eval"), cfg.train);
  if (r.has("data")) parse_data(r.sub("data"), cfg.data);
  if (r.has("bench")) parse_bench(r.sub("bench"), cfg.bench);
  r.finish();

  cfg.train.normalize_and_validate();
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  json mix = json::array();
  for (const auto& [kind, weight] : cfg.data.mix)
    mix.push_back(json::array({shape_kind_name(kind), weight}));

  json sweeps = json::array();
  for (const auto& s : cfg.bench.sweeps)
    sweeps.push_back(json{{"axis", sweep_axis_name(s.axis)}, {"grid", s.grid}});

  json j{
      {"seed", t.seed},
      {"threads", t.threads},
      {"model",
       {{"edge_hidden", t.fen.edge_hidden},
        {"l1", t.fen.l1},
        {"l2", t.fen.l2},
        {"l3", t.fen.l3},
        {"fusion_hidden", t.fen.fusion_hidden},
        {"k_graph", t.fen.k_graph},
        {"graph_mode", graph_mode_name(t.fen.graph_mode)},
        {"use_global_branch", t.fen.use_global_branch}}},
      {"train",
       {{"epochs", t.epochs},
        {"lr", t.lr},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"eps", t.eps},
        {"q_fraction", t.q_fraction},
        {"k_descriptor", t.k_descriptor},
        {"k_loss", t.k_loss},
        {"m_p", t.m_p},
        {"m_n", t.m_n},
        {"rotation_range_deg", t.rotation_range_deg},
        {"translation_range", t.translation_range},
        {"noise_sigma", t.noise_sigma},
        {"use_ri", t.use_ri},
        {"sampling_mode", sampling_mode_name(t.sampling_mode)}}},
      {"eval",
       {{"registrar", registrar_name(t.registrar)},
        {"k_groups", t.k_groups},
        {"k_top", t.k_top},
        {"icp_max_iters", t.icp_max_iters},
        {"icp_tol", t.icp_tol}}},
      {"data",
       {{"source", cfg.data.source == DataSpec::Source::kGenerate ? "generate" : "dir"},
        {"dir", cfg.data.dir},
        {"eval_dir", cfg.data.eval_dir},
        {"mix", mix},
        {"n_points", cfg.data.n_points},
        {"count", cfg.data.count},
        {"eval_count", cfg.data.eval_count}}},
      {"bench", {{"include_icp", cfg.bench.include_icp}, {"sweeps", sweeps}}}};
  return j.dump(2);
}

namespace {

ShapeKind pick_kind(const std::vector<std::pair<ShapeKind, double>>& mix, Rng& rng) {
  double total = 0.0;
  for (const auto& [kind, w] : mix) total += w;
  double u = rng.uniform(0.0, total);
  for (const auto& [kind, w] : mix) {
    if (u < w) return kind;
    u -= w;
  }
  return mix.back().first;
}

std::vector<PointCloud> load_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".xyz" || ext == ".ply") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error(dir + ": no .xyz or .ply files");
  std::vector<PointCloud> clouds;
  clouds.reserve(files.size());
  for (const auto& f : files) clouds.push_back(read_cloud(f));
  return clouds;
}

}  // namespace

void load_datasets(const DataSpec& spec, std::uint64_t seed,
                   std::vector<PointCloud>& train_shapes, std::vector<PointCloud>& eval_shapes) {
  train_shapes.clear();
  eval_shapes.clear();

  if (spec.source == DataSpec::Source::kDir) {
    train_shapes = load_dir(spec.dir);
    if (!spec.eval_dir.empty()) {
      eval_shapes = load_dir(spec.eval_dir);
    } else {
      const int keep = std::max(1, static_cast<int>(train_shapes.size()) - spec.eval_count);
      eval_shapes.assign(train_shapes.begin() + keep, train_shapes.end());
      train_shapes.resize(keep);
    }
    return;
  }

  for (int i = 0; i < spec.count + spec.eval_count; ++i) {
    Rng kind_rng(derive_seed(seed, 0xda7aull + i));
    const ShapeKind kind = pick_kind(spec.mix, kind_rng);
    PointCloud cloud = generate_shape(kind, spec.n_points, derive_seed(seed, 0x5eedull + i));
    if (i < spec.count)
      train_shapes.push_back(std::move(cloud));
    else
      eval_shapes.push_back(std::move(cloud));
  }
}

}  // namespace rigidreg
