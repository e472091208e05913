/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rigidreg/parallel.hpp"
#include "rigidreg/softcorr.hpp"

namespace rigidreg {

SamplingMode parse_sampling_mode(const std::string& name) {
  if (name == "confidence") return SamplingMode::kConfidence;
  if (name == "uniform") return SamplingMode::kUniform;
  throw std::invalid_argument("unknown sampling mode: " + name);
}

std::string sampling_mode_name(SamplingMode mode) {
  return mode == SamplingMode::kConfidence ? "confidence" : "uniform";
}

RegistrarKind parse_registrar(const std::string& name) {
  if (name == "consensus") return RegistrarKind::kConsensus;
  if (name == "full") return RegistrarKind::kFull;
  if (name == "topk") return RegistrarKind::kTopK;
  if (name == "icp") return RegistrarKind::kIcp;
  throw std::invalid_argument("unknown registrar: " + name);
}

std::string registrar_name(RegistrarKind kind) {
  switch (kind) {
    case RegistrarKind::kConsensus: return "consensus";
    case RegistrarKind::kFull: return "full";
    case RegistrarKind::kTopK: return "topk";
    case RegistrarKind::kIcp: return "icp";
  }
  throw std::invalid_argument("unknown registrar enum");
}

void TrainConfig::normalize_and_validate() {
  fen.in_channels = use_ri ? kRiChannels : kCartesianChannels;
  fen.validate();
  auto check = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("TrainConfig: invalid value for '") + field + "'");
  };
  check(epochs >= 1, "epochs");
  check(lr >= 0.0, "lr");
  check(beta1 >= 0.0 && beta1 < 1.0, "beta1");
  check(beta2 >= 0.0 && beta2 < 1.0, "beta2");
  check(eps > 0.0, "eps");
  check(q_fraction > 0.0 && q_fraction <= 1.0, "q_fraction");
  check(k_descriptor >= 1, "k_descriptor");
  check(k_loss >= 1, "k_loss");
  check(m_n >= 0.0 && m_n < m_p && m_p <= 1.0, "m_p/m_n");
  check(rotation_range_deg >= 0.0 && rotation_range_deg <= 180.0, "rotation_range_deg");
  check(translation_range >= 0.0, "translation_range");
  check(noise_sigma >= 0.0, "noise_sigma");
  check(threads >= 1, "threads");
  check(k_groups >= 1, "k_groups");
  check(k_top >= 0, "k_top");
  check(icp_max_iters >= 1, "icp_max_iters");
  check(icp_tol > 0.0, "icp_tol");
}

int TrainConfig::bag_size(int n_points) const {
  return std::max(1, static_cast<int>(std::lround(q_fraction * n_points)));
}

TrainPair make_pair(const PointCloud& x, const TrainConfig& cfg, Rng& rng) {
  TrainPair pair;
  pair.x = x;
  RigidTransform t;
  if (cfg.rotation_range_deg > 0.0) t.rotation = random_rotation(cfg.rotation_range_deg, rng);
  if (cfg.translation_range > 0.0) {
    const double tr = cfg.translation_range;
    t.translation = {rng.uniform(-tr, tr), rng.uniform(-tr, tr), rng.uniform(-tr, tr)};
  }
  pair.truth = t;
  PointCloud y = apply_transform(x, t);
  pair.y = cfg.noise_sigma > 0.0 ? add_gaussian_noise(y, cfg.noise_sigma, rng) : std::move(y);
  return pair;
}

namespace {

DescriptorTensor make_descriptors(const PointCloud& cloud, const TrainConfig& cfg) {
  return cfg.use_ri ? ri_features(cloud, cfg.k_descriptor)
                    : cartesian_features(cloud, cfg.k_descriptor);
}

std::vector<int> draw_bag(const Matrix& p, const TrainConfig& cfg, int n, Rng& rng) {
  const int size = cfg.bag_size(n);
  if (cfg.sampling_mode == SamplingMode::kUniform) {
    std::vector<int> bag(size);
    for (int& v : bag) v = rng.uniform_int(n);
    return bag;
  }
  return sample_bag(confidence(p), size, rng);
}

LossReport train_step(FenModel& model, AdamState& adam, const PointCloud& shape,
                      const TrainConfig& cfg, Rng& rng) {
  const TrainPair pair = make_pair(shape, cfg, rng);
  const int n = static_cast<int>(pair.x.size());

  const DescriptorTensor dx = make_descriptors(pair.x, cfg);
  const DescriptorTensor dy = make_descriptors(pair.y, cfg);

  FenCache cx, cy;
  const Matrix hx = fen_forward(model, dx, pair.x, &cx);
  const Matrix hy = fen_forward(model, dy, pair.y, &cy);

  const Matrix p = soft_correspondence(hx, hy);
  const std::vector<int> bag = draw_bag(p, cfg, n, rng);
  const std::vector<int> w = bag_weights(bag, n);
  const AdjacencySets adj = build_adjacency(pair.y, cfg.k_loss);

  Matrix dp;
  const LossReport report = total_loss(p, adj, w, cfg.m_p, cfg.m_n, &dp);

  Matrix dhx, dhy;
  cosine_backward(hx, hy, p, dp, dhx, dhy);
  fen_backward(model, cx, dhx, /*accumulate=*/false);
  fen_backward(model, cy, dhy, /*accumulate=*/true);
  adam_step(model, adam, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  return report;
}

}  // namespace

TrainResult train(const std::vector<PointCloud>& dataset, const TrainConfig& cfg_in,
                  const TrainResult* resume) {
  TrainConfig cfg = cfg_in;
  cfg.normalize_and_validate();
  if (dataset.empty()) throw std::invalid_argument("train: dataset is empty");

  TrainResult result;
  if (resume) {
    result.model = resume->model;
    result.adam = resume->adam;
    result.steps = resume->steps;
  } else {
    result.model = fen_init(cfg.fen, cfg.seed);
    result.adam = adam_init(result.model);
  }

  Rng rng(derive_seed(cfg.seed, 0x7a11 + static_cast<std::uint64_t>(result.steps)));

  std::vector<int> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the run rng keeps the whole loop a pure function of
    // (dataset, cfg, resume point).
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);

    for (int idx : order) {
      const LossReport report = train_step(result.model, result.adam, dataset[idx], cfg, rng);
      result.steps += 1;
      result.log.push_back({result.steps, report});
    }
  }
  return result;
}

RegistrationOutput register_pair(const FenModel* model, const PointCloud& src,
                                 const PointCloud& dst, const TrainConfig& cfg, Rng& rng) {
  RegistrationOutput out;

  if (cfg.registrar == RegistrarKind::kIcp) {
    IcpConfig icfg;
    icfg.max_iters = cfg.icp_max_iters;
    icfg.tol = cfg.icp_tol;
    out.transform = icp(src, dst, icfg).transform;
    out.chamfer = chamfer(apply_transform(src, out.transform), dst);
    return out;
  }

  if (!model) throw std::invalid_argument("register_pair: model required for learned registrars");

  const DescriptorTensor ds = make_descriptors(src, cfg);
  const DescriptorTensor dd = make_descriptors(dst, cfg);
  const Matrix hx = fen_forward(*model, ds, src);
  const Matrix hy = fen_forward(*model, dd, dst);
  const Matrix p = soft_correspondence(hx, hy);
  const int n = static_cast<int>(src.size());

  switch (cfg.registrar) {
    case RegistrarKind::kFull:
      out.transform = full_register(src, dst, p);
      break;
    case RegistrarKind::kTopK: {
      const int k_top = cfg.k_top > 0 ? cfg.k_top : cfg.bag_size(n);
      out.transform = topk_register(src, dst, p, std::min(std::max(3, k_top), n));
      break;
    }
    case RegistrarKind::kConsensus: {
      const std::vector<int> bag = draw_bag(p, cfg, n, rng);
      const int k_groups = std::max(1, std::min(cfg.k_groups, static_cast<int>(bag.size()) / 3));
      ConsensusResult cr = consensus_register(src, dst, p, bag, k_groups, rng, cfg.threads);
      out.transform = cr.transform;
      out.experiments = std::move(cr.experiments);
      break;
    }
    case RegistrarKind::kIcp:
      break;  // handled above
  }
  out.chamfer = chamfer(apply_transform(src, out.transform), dst);
  return out;
}

namespace {

void finalize_metrics(MetricsReport& report) {
  const double n = static_cast<double>(report.pairs.size());
  double se_r = 0.0, ae_r = 0.0, se_t = 0.0, ae_t = 0.0, ch = 0.0;
  std::array<double, 3> se_rc{}, ae_rc{}, se_tc{}, ae_tc{};
  for (const PairMetrics& pm : report.pairs) {
    for (int c = 0; c < 3; ++c) {
      const double er = pm.euler_residual_deg[c];
      const double et = pm.translation_residual[c];
      se_r += er * er;
      ae_r += std::abs(er);
      se_t += et * et;
      ae_t += std::abs(et);
      se_rc[c] += er * er;
      ae_rc[c] += std::abs(er);
      se_tc[c] += et * et;
      ae_tc[c] += std::abs(et);
    }
    ch += pm.chamfer;
  }
  report.rmse_r = std::sqrt(se_r / (3.0 * n));
  report.mae_r = ae_r / (3.0 * n);
  report.rmse_t = std::sqrt(se_t / (3.0 * n));
  report.mae_t = ae_t / (3.0 * n);
  for (int c = 0; c < 3; ++c) {
    report.rmse_r_comp[c] = std::sqrt(se_rc[c] / n);
    report.mae_r_comp[c] = ae_rc[c] / n;
    report.rmse_t_comp[c] = std::sqrt(se_tc[c] / n);
    report.mae_t_comp[c] = ae_tc[c] / n;
  }
  report.chamfer_mean = ch / n;
}

}  // namespace

MetricsReport evaluate(const FenModel* model, const std::vector<PointCloud>& dataset,
                       const TrainConfig& cfg_in) {
  TrainConfig cfg = cfg_in;
  cfg.normalize_and_validate();
  if (dataset.empty()) throw std::invalid_argument("evaluate: dataset is empty");
  if (!model && cfg.registrar != RegistrarKind::kIcp)
    throw std::invalid_argument("evaluate: model required for learned registrars");

  MetricsReport report;
  report.pairs.resize(dataset.size());

  parallel_for(static_cast<int>(dataset.size()), cfg.threads, [&](int i) {
    Rng rng(derive_seed(cfg.seed, 0xeba1ull + static_cast<std::uint64_t>(i) * 2));
    const TrainPair pair = make_pair(dataset[i], cfg, rng);
    // Registration consumes an independent stream so that changing e.g. the
    // noise level never perturbs the bag draws of other pairs.
    Rng reg_rng(derive_seed(cfg.seed, 0xc0deull + static_cast<std::uint64_t>(i) * 2));
    TrainConfig pair_cfg = cfg;
    pair_cfg.threads = 1;  // outer loop already parallel
    const RegistrationOutput ro = register_pair(model, pair.x, pair.y, pair_cfg, reg_rng);

    PairMetrics pm;
    pm.index = i;
    const Mat3 rel = ro.transform.rotation.transposed() * pair.truth.rotation;
    pm.euler_residual_deg = euler_angles_deg(rel);
    pm.rotation_angle_deg = rotation_angle_deg(rel);
    const Vec3 dt = ro.transform.translation - pair.truth.translation;
    pm.translation_residual = {dt.x, dt.y, dt.z};
    pm.chamfer = ro.chamfer;
    report.pairs[i] = pm;
  });

  finalize_metrics(report);
  return report;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "rotation_range") return SweepAxis::kRotationRange;
  if (name == "noise_sigma") return SweepAxis::kNoiseSigma;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

std::string sweep_axis_name(SweepAxis axis) {
  return axis == SweepAxis::kRotationRange ? "rotation_range" : "noise_sigma";
}

std::vector<SweepRow> sweep(const std::vector<PointCloud>& train_shapes,
                            const std::vector<PointCloud>& eval_shapes, SweepAxis axis,
                            const std::vector<double>& grid, const TrainConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("sweep: grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());

  if (axis == SweepAxis::kRotationRange) {
    for (double value : grid) {
      TrainConfig point_cfg = cfg;
      point_cfg.rotation_range_deg = value;
      const TrainResult tr = train(train_shapes, point_cfg);
      rows.push_back({value, evaluate(&tr.model, eval_shapes, point_cfg)});
    }
  } else {
    const TrainResult tr = train(train_shapes, cfg);
    for (double value : grid) {
      TrainConfig point_cfg = cfg;
      point_cfg.noise_sigma = value;
      rows.push_back({value, evaluate(&tr.model, eval_shapes, point_cfg)});
    }
  }
  return rows;
}

}  // namespace rigidreg
