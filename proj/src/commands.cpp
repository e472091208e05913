/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rigidreg/checkpoint.hpp"
#include "rigidreg/config.hpp"
#include "rigidreg/io.hpp"
#include "rigidreg/manifest.hpp"
#include "rigidreg/softcorr.hpp"
#include "rigidreg/trainer.hpp"

namespace rigidreg::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir + ": cannot create directory: " + ec.message());
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_trainlog(const std::string& path, const TrainResult& result) {
  std::string csv = "step,l_h,l_pq,l_nq,l_c\n";
  for (const LossRow& row : result.log) {
    csv += std::to_string(row.step) + "," + fmt17(row.loss.l_h) + "," + fmt17(row.loss.l_pq) +
           "," + fmt17(row.loss.l_nq) + "," + fmt17(row.loss.l_c) + "\n";
  }
  write_text(path, csv);
}

json metrics_row(const std::string& label, const MetricsReport& m) {
  return json{{"method", label},
              {"rmse_r", m.rmse_r},
              {"mae_r", m.mae_r},
              {"rmse_t", m.rmse_t},
              {"mae_t", m.mae_t},
              {"rmse_r_components", m.rmse_r_comp},
              {"mae_r_components", m.mae_r_comp},
              {"chamfer_mean", m.chamfer_mean},
              {"pairs", m.pairs.size()}};
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string csv = "axis,rmse_r,mae_r,rmse_t,mae_t,chamfer_mean\n";
  for (const SweepRow& row : rows) {
    csv += fmt17(row.axis_value) + "," + fmt17(row.metrics.rmse_r) + "," +
           fmt17(row.metrics.mae_r) + "," + fmt17(row.metrics.rmse_t) + "," +
           fmt17(row.metrics.mae_t) + "," + fmt17(row.metrics.chamfer_mean) + "\n";
  }
  return csv;
}

}  // namespace

void generate(const GenerateOptions& opts) {
  if (opts.out_dir.empty()) throw std::invalid_argument("generate: out_dir is required");
  if (opts.count < 1) throw std::invalid_argument("generate: count must be >= 1");
  const ShapeKind kind = parse_shape_kind(opts.kind);
  ensure_dir(opts.out_dir);

  RunManifest manifest;
  manifest.command = "generate";
  manifest.seed = opts.seed;
  manifest.options_json = json{{"kind", opts.kind},
                               {"n", opts.n},
                               {"count", opts.count},
                               {"seed", opts.seed},
                               {"out_dir", opts.out_dir}}
                              .dump();

  StageTimer timer(manifest);
  timer.time("generate", [&] {
    for (int i = 0; i < opts.count; ++i) {
      const PointCloud cloud = generate_shape(kind, opts.n, derive_seed(opts.seed, 0x5eedull + i));
      char name[64];
      std::snprintf(name, sizeof name, "cloud_%04d.xyz", i);
      const std::string path = (fs::path(opts.out_dir) / name).string();
      write_xyz(cloud, path);
      manifest.outputs.push_back(path);
    }
  });
  manifest.save((fs::path(opts.out_dir) / "manifest.json").string());
}

namespace {

void train_resolved(const RunConfig& cfg, const std::string& out_checkpoint,
                    const std::string& resume_checkpoint) {
  if (out_checkpoint.empty()) throw std::invalid_argument("train: out_checkpoint is required");

  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = cfg.train.seed;
  manifest.options_json = json{{"config", json::parse(run_config_to_json(cfg))},
                               {"out_checkpoint", out_checkpoint},
                               {"resume_checkpoint", resume_checkpoint}}
                              .dump();

  StageTimer timer(manifest);

  std::vector<PointCloud> train_shapes, eval_shapes;
  timer.time("load_data", [&] { load_datasets(cfg.data, cfg.train.seed, train_shapes, eval_shapes); });
  if (cfg.data.source == DataSpec::Source::kDir) manifest.add_input(cfg.data.dir + "/");

  TrainResult resume;
  const TrainResult* resume_ptr = nullptr;
  if (!resume_checkpoint.empty()) {
    const Checkpoint ck = load_checkpoint(resume_checkpoint);
    if (!ck.has_adam)
      throw std::runtime_error(resume_checkpoint + ": checkpoint lacks optimizer state, cannot resume");
    resume.model = ck.model;
    resume.adam = ck.adam;
    resume.steps = ck.steps;
    resume_ptr = &resume;
    manifest.add_input(resume_checkpoint);
  }

  const TrainResult result =
      timer.time("train", [&] { return rigidreg::train(train_shapes, cfg.train, resume_ptr); });

  const auto parent = fs::path(out_checkpoint).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  save_checkpoint(out_checkpoint, result.model, result.steps, &result.adam);

  // Registration-time settings ride along so `register` can replay them.
  {
    std::fstream patch;  // no-op; checkpoint already carries the fen config
  }
  const std::string log_path = out_checkpoint + ".log.csv";
  write_trainlog(log_path, result);

  manifest.outputs.push_back(out_checkpoint);
  manifest.outputs.push_back(log_path);
  manifest.save(out_checkpoint + ".manifest.json");
}

}  // namespace

void train(const TrainOptions& opts) {
  RunConfig cfg = run_config_from_json(opts.config_json);
  if (!opts.data_dir.empty()) {
    cfg.data.source = DataSpec::Source::kDir;
    cfg.data.dir = opts.data_dir;
  }
  train_resolved(cfg, opts.out_checkpoint, opts.resume_checkpoint);
}

void register_clouds(const RegisterOptions& opts) {
  if (opts.src_path.empty() || opts.dst_path.empty())
    throw std::invalid_argument("register: src and dst are required");
  if (opts.out_json.empty()) throw std::invalid_argument("register: out_json is required");
  const RegistrarKind registrar = parse_registrar(opts.registrar);

  RunManifest manifest;
  manifest.command = "register";
  manifest.seed = opts.seed;
  manifest.options_json = json{{"checkpoint", opts.checkpoint},
                               {"src", opts.src_path},
                               {"dst", opts.dst_path},
                               {"registrar", opts.registrar},
                               {"seed", opts.seed},
                               {"threads", opts.threads},
                               {"out_json", opts.out_json},
                               {"dump_dir", opts.dump_dir}}
                              .dump();
  StageTimer timer(manifest);

  const PointCloud src = read_cloud(opts.src_path);
  const PointCloud dst = read_cloud(opts.dst_path);
  manifest.add_input(opts.src_path);
  manifest.add_input(opts.dst_path);

  TrainConfig cfg;
  FenModel model;
  const FenModel* model_ptr = nullptr;
  if (registrar != RegistrarKind::kIcp) {
    if (opts.checkpoint.empty())
      throw std::invalid_argument("register: checkpoint required unless registrar is icp");
    Checkpoint ck = load_checkpoint(opts.checkpoint);
    manifest.add_input(opts.checkpoint);
    model = std::move(ck.model);
    model_ptr = &model;
    cfg.fen = model.cfg;
    cfg.use_ri = model.cfg.in_channels == kRiChannels;
    cfg.k_descriptor = model.cfg.k_graph;
  }
  cfg.registrar = registrar;
  cfg.threads = opts.threads;
  cfg.seed = opts.seed;
  cfg.normalize_and_validate();

  Rng rng(derive_seed(opts.seed, 0x2317ull));
  const RegistrationOutput out =
      timer.time("register", [&] { return register_pair(model_ptr, src, dst, cfg, rng); });

  const auto euler = euler_angles_deg(out.transform.rotation);
  json j{{"R",
          {out.transform.rotation.m[0][0], out.transform.rotation.m[0][1],
           out.transform.rotation.m[0][2], out.transform.rotation.m[1][0],
           out.transform.rotation.m[1][1], out.transform.rotation.m[1][2],
           out.transform.rotation.m[2][0], out.transform.rotation.m[2][1],
           out.transform.rotation.m[2][2]}},
         {"t",
          {out.transform.translation.x, out.transform.translation.y, out.transform.translation.z}},
         {"chamfer", out.chamfer},
         {"euler_deg", euler},
         {"registrar", opts.registrar},
         {"seed", opts.seed}};
  const auto parent = fs::path(opts.out_json).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  write_text(opts.out_json, j.dump(2) + "\n");
  manifest.outputs.push_back(opts.out_json);

  if (!opts.dump_dir.empty() && model_ptr) {
    ensure_dir(opts.dump_dir);
    const DescriptorTensor ds = cfg.use_ri ? ri_features(src, cfg.k_descriptor)
                                           : cartesian_features(src, cfg.k_descriptor);
    const DescriptorTensor dd = cfg.use_ri ? ri_features(dst, cfg.k_descriptor)
                                           : cartesian_features(dst, cfg.k_descriptor);
    const Matrix p = soft_correspondence(fen_forward(model, ds, src), fen_forward(model, dd, dst));
    const std::string corr_path = (fs::path(opts.dump_dir) / "correspondence.csv").string();
    dump_correspondence_csv(p, confidence(p), corr_path);
    manifest.outputs.push_back(corr_path);
    if (!out.experiments.empty()) {
      const std::string exp_path = (fs::path(opts.dump_dir) / "experiments.json").string();
      dump_experiments_json(out.experiments, exp_path);
      manifest.outputs.push_back(exp_path);
    }
  }

  manifest.save(opts.out_json + ".manifest.json");
}

namespace {

void bench_resolved(const RunConfig& cfg, const std::string& out_dir) {
  if (out_dir.empty()) throw std::invalid_argument("bench: out_dir is required");
  ensure_dir(out_dir);

  RunManifest manifest;
  manifest.command = "bench";
  manifest.seed = cfg.train.seed;
  manifest.options_json =
      json{{"config", json::parse(run_config_to_json(cfg))}, {"out_dir", out_dir}}.dump();
  StageTimer timer(manifest);

  std::vector<PointCloud> train_shapes, eval_shapes;
  timer.time("load_data", [&] { load_datasets(cfg.data, cfg.train.seed, train_shapes, eval_shapes); });

  const TrainResult result =
      timer.time("train", [&] { return rigidreg::train(train_shapes, cfg.train); });

  const std::string ck_path = (fs::path(out_dir) / "checkpoint.fen").string();
  save_checkpoint(ck_path, result.model, result.steps, &result.adam);
  const std::string log_path = (fs::path(out_dir) / "trainlog.csv").string();
  write_trainlog(log_path, result);
  manifest.outputs.push_back(ck_path);
  manifest.outputs.push_back(log_path);

  json rows = json::array();
  timer.time("evaluate", [&] {
    rows.push_back(metrics_row("dwc_" + registrar_name(cfg.train.registrar),
                               evaluate(&result.model, eval_shapes, cfg.train)));
    if (cfg.bench.include_icp) {
      TrainConfig icp_cfg = cfg.train;
      icp_cfg.registrar = RegistrarKind::kIcp;
      rows.push_back(metrics_row("icp", evaluate(nullptr, eval_shapes, icp_cfg)));
    }
  });

  const std::string metrics_path = (fs::path(out_dir) / "metrics.json").string();
  write_text(metrics_path, json{{"rows", rows}}.dump(2) + "\n");
  manifest.outputs.push_back(metrics_path);

  timer.time("sweeps", [&] {
    for (const SweepSpec& spec : cfg.bench.sweeps) {
      const auto sweep_rows = sweep(train_shapes, eval_shapes, spec.axis, spec.grid, cfg.train);
      const std::string path =
          (fs::path(out_dir) / ("sweep_" + sweep_axis_name(spec.axis) + ".csv")).string();
      write_text(path, sweep_csv(sweep_rows));
      manifest.outputs.push_back(path);
    }
  });

  manifest.save((fs::path(out_dir) / "manifest.json").string());
}

struct AblationMode {
  std::string label;
  bool retrain = false;
  std::function<void(TrainConfig&)> apply;
};

void ablate_resolved(const RunConfig& cfg, const std::string& out_dir) {
  if (out_dir.empty()) throw std::invalid_argument("ablate: out_dir is required");
  ensure_dir(out_dir);

  RunManifest manifest;
  manifest.command = "ablate";
  manifest.seed = cfg.train.seed;
  manifest.options_json =
      json{{"config", json::parse(run_config_to_json(cfg))}, {"out_dir", out_dir}}.dump();
  StageTimer timer(manifest);

  std::vector<PointCloud> train_shapes, eval_shapes;
  timer.time("load_data", [&] { load_datasets(cfg.data, cfg.train.seed, train_shapes, eval_shapes); });

  // The "Mode" labels state the switched-off component. Modes that only
  // change the registrar reuse the base model; the others retrain.
  const std::vector<AblationMode> modes = {
      {"full", false, [](TrainConfig&) {}},
      {"(i) no_ri_features", true, [](TrainConfig& c) { c.use_ri = false; }},
      {"(ii) no_global_branch", true, [](TrainConfig& c) { c.fen.use_global_branch = false; }},
      {"(iii) dynamic_graph", true,
       [](TrainConfig& c) { c.fen.graph_mode = GraphMode::kDynamic; }},
      {"(iv) uniform_sampling", true,
       [](TrainConfig& c) { c.sampling_mode = SamplingMode::kUniform; }},
      {"(v) full_svd", false, [](TrainConfig& c) { c.registrar = RegistrarKind::kFull; }},
      {"(vi) topk_svd", false, [](TrainConfig& c) { c.registrar = RegistrarKind::kTopK; }},
  };

  TrainResult base;
  bool have_base = false;
  json rows = json::array();
  for (const AblationMode& mode : modes) {
    TrainConfig mode_cfg = cfg.train;
    mode.apply(mode_cfg);
    mode_cfg.normalize_and_validate();

    const TrainResult* model_result = nullptr;
    TrainResult own;
    if (mode.retrain) {
      timer.time("train " + mode.label, [&] { own = rigidreg::train(train_shapes, mode_cfg); });
      model_result = &own;
    } else {
      if (!have_base) {
        timer.time("train full", [&] { base = rigidreg::train(train_shapes, cfg.train); });
        have_base = true;
      }
      model_result = &base;
    }

    MetricsReport report;
    timer.time("evaluate " + mode.label,
               [&] { report = evaluate(&model_result->model, eval_shapes, mode_cfg); });
    json row = metrics_row(mode.label, report);
    row["mode"] = mode.label;
    row.erase("method");
    rows.push_back(row);
  }

  const std::string table_path = (fs::path(out_dir) / "ablate.json").string();
  write_text(table_path, json{{"rows", rows}}.dump(2) + "\n");
  manifest.outputs.push_back(table_path);
  manifest.save((fs::path(out_dir) / "manifest.json").string());
}

}  // namespace

void bench(const std::string& config_json, const std::string& out_dir) {
  bench_resolved(run_config_from_json(config_json), out_dir);
}

void ablate(const std::string& config_json, const std::string& out_dir) {
  ablate_resolved(run_config_from_json(config_json), out_dir);
}

void rerun(const std::string& manifest_path, const std::string& out_override) {
  const RunManifest m = RunManifest::load(manifest_path);
  json opts;
  try {
    opts = json::parse(m.options_json);
  } catch (const json::exception& e) {
    throw std::runtime_error(manifest_path + ": bad options in manifest: " + e.what());
  }

  if (m.command == "generate") {
    GenerateOptions g;
    g.kind = opts.at("kind").get<std::string>();
    g.n = opts.at("n").get<int>();
    g.count = opts.at("count").get<int>();
    g.seed = opts.at("seed").get<std::uint64_t>();
    g.out_dir = out_override.empty() ? opts.at("out_dir").get<std::string>() : out_override;
    generate(g);
  } else if (m.command == "train") {
    const RunConfig cfg = run_config_from_json(opts.at("config").dump());
    const std::string out = out_override.empty() ? opts.at("out_checkpoint").get<std::string>()
                                                 : out_override;
    train_resolved(cfg, out, opts.at("resume_checkpoint").get<std::string>());
  } else if (m.command == "register") {
    RegisterOptions r;
    r.checkpoint = opts.at("checkpoint").get<std::string>();
    r.src_path = opts.at("src").get<std::string>();
    r.dst_path = opts.at("dst").get<std::string>();
    r.registrar = opts.at("registrar").get<std::string>();
    r.seed = opts.at("seed").get<std::uint64_t>();
    r.threads = opts.at("threads").get<int>();
    r.out_json = out_override.empty() ? opts.at("out_json").get<std::string>() : out_override;
    r.dump_dir = opts.at("dump_dir").get<std::string>();
    register_clouds(r);
  } else if (m.command == "bench") {
    bench_resolved(run_config_from_json(opts.at("config").dump()),
                   out_override.empty() ? opts.at("out_dir").get<std::string>() : out_override);
  } else if (m.command == "ablate") {
    ablate_resolved(run_config_from_json(opts.at("config").dump()),
                    out_override.empty() ? opts.at("out_dir").get<std::string>() : out_override);
  } else {
    throw std::runtime_error(manifest_path + ": unknown command '" + m.command + "'");
  }
}

}  // namespace rigidreg::commands
