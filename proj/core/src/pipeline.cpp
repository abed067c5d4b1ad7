#include "dfg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfg/error.hpp"
#include "dfg/metrics.hpp"
#include "dfg/sampling.hpp"

namespace dfg {

namespace {

struct Mlp2Ids {
  NodeId w1, b1, w2, b2;
};

Mlp2Ids bind_mlp2(ParamBinder& p, const std::string& prefix) {
  return {p(prefix + "/w1"), p(prefix + "/b1"), p(prefix + "/w2"), p(prefix + "/b2")};
}

NodeId run_mlp2(Tape& t, NodeId x, const Mlp2Ids& m) {
  return record_mlp2(t, x, m.w1, m.b1, m.w2, m.b2);
}

void create_mlp2(ParamStore& store, const std::string& prefix, int in, int hidden, int out,
                 uint64_t seed) {
  store.create_uniform(prefix + "/w1", in, hidden, in, seed);
  store.create_uniform(prefix + "/b1", 1, hidden, in, seed);
  store.create_uniform(prefix + "/w2", hidden, out, hidden, seed);
  store.create_uniform(prefix + "/b2", 1, out, hidden, seed);
}

std::vector<int> flat_indices(const NeighborList& nbrs) {
  std::vector<int> flat;
  for (const auto& nn : nbrs) {
    for (const Neighbor& nb : nn) flat.push_back(nb.index);
  }
  return flat;
}

PointCloud cloud_of(const Tape& t, NodeId coords) {
  return PointCloud::from_matrix(t.value(coords));
}

// ---- extractor ----

struct ExtractorNodes {
  NodeId global_f;
  NodeId per_point;
};

ExtractorNodes record_extractor(Tape& t, const PointCloud& partial, const PipelineConfig& cfg,
                                ParamBinder& params) {
  if (partial.size() < 16) {
    throw Error(ErrorCode::TooFewPoints, "feature extractor needs >= 16 points");
  }

  PointCloud coords_val = partial;
  NodeId coords = t.constant(partial.as_matrix());
  NodeId feats = coords;  // first stage runs on raw coordinates

  for (int stage = 0; stage < 3; ++stage) {
    const std::string prefix = "extractor/l" + std::to_string(stage);
    const int n = coords_val.size();
    const int rows = t.value(feats).rows;
    NodeId h = t.add(t.matmul(feats, params(prefix + "/w")),
                     t.broadcast_row(params(prefix + "/b"), rows));
    h = t.relu(h);

    // max-pool over each point's neighborhood (self included)
    const int k_eff = std::min(cfg.extractor_k, n);
    const NeighborList nbrs = knn(coords_val, coords_val, k_eff);
    const std::vector<int> flat = flat_indices(nbrs);
    t.note_structure(flat);
    std::vector<int> seg(n + 1);
    for (int i = 0; i <= n; ++i) seg[i] = i * k_eff;
    NodeId pooled = t.segment_max(t.gather_rows(h, flat), seg);

    // FPS halving (floor at 8 points)
    const int next_n = std::max(std::min(n, 8), (n + 1) / 2);
    const SampleResult sel = fps(coords_val, next_n, lexicographic_min_index(coords_val));
    t.note_structure(sel.indices);
    coords = t.gather_rows(coords, sel.indices);
    feats = t.gather_rows(pooled, sel.indices);
    PointCloud next;
    next.points.reserve(next_n);
    for (int idx : sel.indices) next.points.push_back(coords_val[idx]);
    coords_val = std::move(next);
  }

  ExtractorNodes out;
  out.global_f = t.segment_max(feats, {0, coords_val.size()});
  out.per_point = record_interpolate(t, coords, feats, t.constant(partial.as_matrix()));
  return out;
}

// ---- seed generator ----

struct SeedNodes {
  NodeId coords;
  NodeId feats;
};

SeedNodes record_seed(Tape& t, const PointCloud& partial, const ExtractorNodes& ex,
                      const PipelineConfig& cfg, ParamBinder& params) {
  const int n = partial.size();
  const int nc = std::min(cfg.nc, n);
  if (cfg.n0 > n + nc) {
    throw Error(ErrorCode::ConfigError, "seed size n0 exceeds input plus candidate count");
  }

  const SampleResult base_sel = fps(partial, nc, lexicographic_min_index(partial));
  t.note_structure(base_sel.indices);

  const NodeId partial_coords = t.constant(partial.as_matrix());
  const NodeId base_coords = t.gather_rows(partial_coords, base_sel.indices);
  const NodeId base_feats = t.gather_rows(ex.per_point, base_sel.indices);

  const NodeId mlp_in = t.concat_cols(base_feats, t.broadcast_row(ex.global_f, nc));
  const NodeId raw = run_mlp2(t, mlp_in, bind_mlp2(params, "seed"));
  const NodeId offsets = t.scale(t.tanh(raw), cfg.seed_offset_clamp);
  const NodeId generated = t.add(base_coords, offsets);

  const NodeId union_coords = t.concat_rows(generated, partial_coords);
  const NodeId union_feats = t.concat_rows(base_feats, ex.per_point);

  const PointCloud union_val = cloud_of(t, union_coords);
  const SampleResult seed_sel = fps(union_val, cfg.n0, lexicographic_min_index(union_val));
  t.note_structure(seed_sel.indices);

  return {t.gather_rows(union_coords, seed_sel.indices),
          t.gather_rows(union_feats, seed_sel.indices)};
}

// ---- one block ----

struct BlockNodes {
  NodeId coords;
  NodeId feats;
  StageDiagnostics diag;
};

NodeId record_down_up(Tape& t, NodeId coords, NodeId q, int s) {
  if (s == 1) return q;
  const PointCloud cloud_val = cloud_of(t, coords);
  const int n = cloud_val.size();
  const int m = (n + s - 1) / s;

  const SampleResult sel = fps(cloud_val, m, lexicographic_min_index(cloud_val));
  t.note_structure(sel.indices);
  const NodeId coarse_coords = t.gather_rows(coords, sel.indices);
  const NodeId coarse_feats = t.gather_rows(q, sel.indices);
  return record_interpolate(t, coarse_coords, coarse_feats, coords);
}

BlockNodes record_block(Tape& t, int block_index, NodeId coords, NodeId h_prev, NodeId global_f,
                        const PipelineConfig& cfg, ParamBinder& params) {
  const std::string bp = "block" + std::to_string(block_index);
  const int n = t.value(coords).rows;
  const int c = cfg.width;
  const PointCloud cloud_val = cloud_of(t, coords);

  // per-point features
  const NodeId q_in = t.concat_cols(t.concat_cols(coords, h_prev), t.broadcast_row(global_f, n));
  const NodeId q = run_mlp2(t, q_in, bind_mlp2(params, bp + "/q"));

  // detail metric
  const NodeId du = record_down_up(t, coords, q, cfg.s);
  const NodeId detail = t.add(t.sum_cols(t.abs(t.sub(q, du))), t.sum_cols(t.abs(t.sub(q, h_prev))));

  BlockNodes out;
  out.diag.detail.values.assign(t.value(detail).data.begin(), t.value(detail).data.end());

  const int k_c_eff = std::clamp(cfg.k_c, 3, n - 1);
  out.diag.curvature = estimate_curvature(cloud_val, k_c_eff);

  const int d_max_eff = std::min(cfg.d_max, n - 1);
  const int d_min_eff = std::min(cfg.d_min, d_max_eff);
  out.diag.degrees = allocate_degrees(out.diag.detail, out.diag.curvature, cfg.alpha, d_min_eff,
                                      d_max_eff, cfg.share_mode);
  t.note_structure(out.diag.degrees.degrees);

  // channel aggregation
  NodeId h_local = -1;
  NodeId h_global = -1;
  if (cfg.channels != GraphChannels::GlobalOnly) {
    const FlexGraph g = build_local_graph(cloud_val, out.diag.degrees);
    t.note_structure(g.targets);
    const PosEncodingIds enc{params(bp + "/delta_local/w"), params(bp + "/delta_local/b")};
    const NodeId delta = record_pos_encode(t, coords, enc);
    const Mlp2Ids beta = bind_mlp2(params, bp + "/beta_local");
    const NodeId logits = record_edge_logits(t, g, q, delta, coords,
                                             {beta.w1, beta.b1, beta.w2, beta.b2}, cfg.gamma);
    const NodeId weights = record_masked_softmax(t, g, logits);
    h_local = record_aggregate(t, g, weights, h_prev, delta);
  } else {
    h_local = t.constant(Matrix(n, c));
  }
  if (cfg.channels != GraphChannels::LocalOnly) {
    const auto [g, anchors] =
        build_global_graph(cloud_val, t.value(q), out.diag.degrees, cfg.anchor_count,
                           lexicographic_min_index(cloud_val));
    t.note_structure(anchors.indices);
    t.note_structure(g.targets);
    const PosEncodingIds enc{params(bp + "/delta_global/w"), params(bp + "/delta_global/b")};
    const NodeId delta = record_pos_encode(t, coords, enc);
    const Mlp2Ids beta = bind_mlp2(params, bp + "/beta_global");
    const NodeId logits = record_edge_logits(t, g, q, delta, coords,
                                             {beta.w1, beta.b1, beta.w2, beta.b2}, cfg.gamma);
    const NodeId weights = record_masked_softmax(t, g, logits);
    h_global = record_aggregate(t, g, weights, h_prev, delta);
  } else {
    h_global = t.constant(Matrix(n, c));
  }

  // two-stage fusion, then the per-point head
  const AttentionIds f1{params(bp + "/fusion1/wq"), params(bp + "/fusion1/wk"),
                        params(bp + "/fusion1/wv"), params(bp + "/fusion1/wv")};
  const FusionNodes local_out = record_local_fusion(t, h_local, detail, f1);
  const AttentionIds f2{params(bp + "/fusion2/wq"), params(bp + "/fusion2/wk"),
                        params(bp + "/fusion2/wv"), params(bp + "/fusion2/wg")};
  const FusionNodes fused = record_global_fusion(t, local_out.out, h_global, f2);
  const NodeId h_out = run_mlp2(t, fused.out, bind_mlp2(params, bp + "/h"));

  // duplicate + offset upsampling
  const int r = cfg.ratios[block_index];
  if (r < 1) throw Error(ErrorCode::ConfigError, "up ratio must be >= 1");
  std::vector<int> dup(static_cast<size_t>(n) * r);
  for (int j = 0; j < n * r; ++j) dup[j] = j / r;
  Matrix one_hot(n * r, r);
  for (int j = 0; j < n * r; ++j) one_hot.at(j, j % r) = 1.0;

  const NodeId p_dup = t.gather_rows(coords, dup);
  const NodeId h_dup = t.gather_rows(h_out, dup);
  const NodeId off_in = t.concat_cols(h_dup, t.constant(std::move(one_hot)));
  const NodeId off_raw = run_mlp2(t, off_in, bind_mlp2(params, bp + "/off"));
  const NodeId delta_p = t.scale(t.tanh(off_raw), cfg.offset_clamp);

  out.coords = t.add(p_dup, delta_p);
  out.feats = h_dup;
  return out;
}

LossBreakdown breakdown_from(const std::array<double, 4>& per_stage) {
  LossBreakdown b;
  b.per_stage = per_stage;
  b.total = per_stage[0] + per_stage[1] + per_stage[2] + per_stage[3];
  return b;
}

}  // namespace

NodeId record_interpolate(Tape& t, NodeId coarse_coords, NodeId coarse_feats,
                          NodeId fine_coords) {
  const PointCloud coarse_val = cloud_of(t, coarse_coords);
  const PointCloud fine_val = cloud_of(t, fine_coords);
  const int n = fine_val.size();
  const int c = t.value(coarse_feats).cols;
  const int k = std::min(3, coarse_val.size());

  const NeighborList nbrs = knn(coarse_val, fine_val, k);
  t.note_structure(flat_indices(nbrs));

  // coincident fine points copy their coarse twin verbatim
  std::vector<int> exact(n, 0);
  for (int i = 0; i < n; ++i) exact[i] = nbrs[i][0].dist < 1e-12 ? 1 : 0;
  t.note_structure(exact);

  std::vector<NodeId> w_slots(k);
  std::vector<std::vector<int>> idx_slots(k, std::vector<int>(n));
  for (int slot = 0; slot < k; ++slot) {
    for (int i = 0; i < n; ++i) idx_slots[slot][i] = nbrs[i][slot].index;
    const NodeId diff = t.sub(fine_coords, t.gather_rows(coarse_coords, idx_slots[slot]));
    const NodeId dist = t.sqrt(t.sum_cols(t.mul(diff, diff)));
    w_slots[slot] = t.recip(t.add_const(dist, 1e-8));
  }
  NodeId wsum = w_slots[0];
  for (int slot = 1; slot < k; ++slot) wsum = t.add(wsum, w_slots[slot]);
  const NodeId inv_wsum = t.recip(wsum);

  NodeId idw = -1;
  for (int slot = 0; slot < k; ++slot) {
    const NodeId wn = t.mul(w_slots[slot], inv_wsum);
    const NodeId term = t.mul(t.broadcast_col(wn, c), t.gather_rows(coarse_feats, idx_slots[slot]));
    idw = slot == 0 ? term : t.add(idw, term);
  }

  Matrix keep(n, 1), copy(n, 1);
  for (int i = 0; i < n; ++i) {
    copy.at(i, 0) = exact[i] ? 1.0 : 0.0;
    keep.at(i, 0) = exact[i] ? 0.0 : 1.0;
  }
  const NodeId blended = t.mul(t.broadcast_col(t.constant(std::move(keep)), c), idw);
  const NodeId copied = t.mul(t.broadcast_col(t.constant(std::move(copy)), c),
                              t.gather_rows(coarse_feats, idx_slots[0]));
  return t.add(blended, copied);
}

ParamStore init_params(const PipelineConfig& cfg) {
  const int c = cfg.width;
  ParamStore store;
  const uint64_t seed = cfg.seed;

  int in = 3;
  for (int stage = 0; stage < 3; ++stage) {
    const std::string prefix = "extractor/l" + std::to_string(stage);
    store.create_uniform(prefix + "/w", in, c, in, seed);
    store.create_uniform(prefix + "/b", 1, c, in, seed);
    in = c;
  }
  create_mlp2(store, "seed", 2 * c, c, 3, seed);

  for (int b = 0; b < 3; ++b) {
    const std::string bp = "block" + std::to_string(b);
    create_mlp2(store, bp + "/q", 3 + 2 * c, c, c, seed);
    for (const char* ch : {"local", "global"}) {
      store.create_uniform(bp + "/delta_" + std::string(ch) + "/w", 3, c, 3, seed);
      store.create_uniform(bp + "/delta_" + std::string(ch) + "/b", 1, c, 3, seed);
      create_mlp2(store, bp + "/beta_" + std::string(ch), c, c, c, seed);
    }
    for (const char* w : {"wq", "wk", "wv"}) {
      store.create_uniform(bp + "/fusion1/" + std::string(w), c, c, c, seed);
    }
    for (const char* w : {"wq", "wk", "wv", "wg"}) {
      store.create_uniform(bp + "/fusion2/" + std::string(w), c, c, c, seed);
    }
    create_mlp2(store, bp + "/h", c, c, c, seed);
    create_mlp2(store, bp + "/off", c + cfg.ratios[b], c, 3, seed);
  }
  return store;
}

PipelineNodes record_complete(Tape& t, const PointCloud& partial, const PipelineConfig& cfg,
                              ParamBinder& params) {
  if (partial.size() < 16) throw Error(ErrorCode::TooFewPoints, "completion needs >= 16 points");
  if (!partial.all_finite()) throw Error(ErrorCode::BadArgument, "non-finite input point");

  PipelineNodes out;
  const ExtractorNodes ex = record_extractor(t, partial, cfg, params);
  out.global_f = ex.global_f;
  out.per_point = ex.per_point;

  const SeedNodes seed = record_seed(t, partial, ex, cfg, params);
  NodeId coords = seed.coords;
  NodeId feats = cfg.h0 == InitialFeatures::Seed
                     ? seed.feats
                     : t.constant(Matrix(t.value(seed.coords).rows, cfg.width));

  out.stage_coords.push_back(coords);
  out.stage_feats.push_back(feats);
  for (int b = 0; b < 3; ++b) {
    BlockNodes block = record_block(t, b, coords, feats, ex.global_f, cfg, params);
    coords = block.coords;
    feats = block.feats;
    out.stage_coords.push_back(coords);
    out.stage_feats.push_back(feats);
    out.diagnostics.push_back(std::move(block.diag));
  }
  return out;
}

NodeId record_chamfer_l1(Tape& t, NodeId coords, const PointCloud& fixed) {
  const int n = t.value(coords).rows;
  const int m = fixed.size();
  if (n == 0 || m == 0) throw Error(ErrorCode::EmptyCloud, "chamfer on empty cloud");

  std::vector<int> pi(static_cast<size_t>(n) * m), si(static_cast<size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      pi[static_cast<size_t>(i) * m + j] = i;
      si[static_cast<size_t>(i) * m + j] = j;
    }
  }
  const NodeId fixed_node = t.constant(fixed.as_matrix());
  const NodeId diff = t.sub(t.gather_rows(coords, pi), t.gather_rows(fixed_node, si));
  const NodeId d2 = t.reshape(t.sum_cols(t.mul(diff, diff)), n, m);

  const NodeId to_fixed = t.scale(t.sum_all(t.sqrt(t.min_rows(d2))), 1.0 / n);
  const NodeId from_fixed = t.scale(t.sum_all(t.sqrt(t.min_rows(t.transpose(d2)))), 1.0 / m);
  return t.add(to_fixed, from_fixed);
}

NodeId record_loss(Tape& t, const PipelineNodes& nodes, const PointCloud& gt) {
  const int final_n = t.value(nodes.stage_coords.back()).rows;
  if (gt.size() < final_n) {
    throw Error(ErrorCode::GtTooSmall, "ground truth smaller than the final stage");
  }
  NodeId total = -1;
  for (size_t i = 0; i < nodes.stage_coords.size(); ++i) {
    const int n_i = t.value(nodes.stage_coords[i]).rows;
    const SampleResult sel = fps(gt, n_i, lexicographic_min_index(gt));
    PointCloud target;
    target.points.reserve(n_i);
    for (int idx : sel.indices) target.points.push_back(gt[idx]);
    const NodeId term = record_chamfer_l1(t, nodes.stage_coords[i], target);
    total = i == 0 ? term : t.add(total, term);
  }
  return total;
}

std::pair<Matrix, Matrix> extract_features(const PointCloud& partial, const PipelineConfig& cfg,
                                           const ParamStore& params) {
  Tape t;
  ParamBinder binder(t, params);
  const ExtractorNodes ex = record_extractor(t, partial, cfg, binder);
  return {t.value(ex.global_f), t.value(ex.per_point)};
}

std::pair<PointCloud, Matrix> generate_seed(const PointCloud& partial, const Matrix& global_f,
                                            const Matrix& per_point, const PipelineConfig& cfg,
                                            const ParamStore& params) {
  Tape t;
  ParamBinder binder(t, params);
  ExtractorNodes ex{t.constant(global_f), t.constant(per_point)};
  const SeedNodes seed = record_seed(t, partial, ex, cfg, binder);
  return {cloud_of(t, seed.coords), t.value(seed.feats)};
}

std::pair<PointCloud, Matrix> dfg_block(const PointCloud& p_prev, const Matrix& h_prev,
                                        const Matrix& global_f, int block_index,
                                        const PipelineConfig& cfg, const ParamStore& params,
                                        StageDiagnostics* diag) {
  Tape t;
  ParamBinder binder(t, params);
  BlockNodes block = record_block(t, block_index, t.constant(p_prev.as_matrix()),
                                  t.constant(h_prev), t.constant(global_f), cfg, binder);
  if (diag != nullptr) *diag = std::move(block.diag);
  return {cloud_of(t, block.coords), t.value(block.feats)};
}

CompletionResult complete(const PointCloud& partial, const PipelineConfig& cfg,
                          const ParamStore& params) {
  Tape t;
  ParamBinder binder(t, params);
  const PipelineNodes nodes = record_complete(t, partial, cfg, binder);

  CompletionResult result;
  result.global_feature = t.value(nodes.global_f);
  for (size_t i = 0; i < nodes.stage_coords.size(); ++i) {
    result.stages.push_back(cloud_of(t, nodes.stage_coords[i]));
    result.features.push_back(t.value(nodes.stage_feats[i]));
  }
  result.diagnostics = nodes.diagnostics;
  return result;
}

LossBreakdown loss(const CompletionResult& result, const PointCloud& gt) {
  if (result.stages.empty()) throw Error(ErrorCode::BadArgument, "empty completion result");
  if (gt.size() < result.stages.back().size()) {
    throw Error(ErrorCode::GtTooSmall, "ground truth smaller than the final stage");
  }
  std::array<double, 4> per_stage{};
  for (size_t i = 0; i < result.stages.size(); ++i) {
    const SampleResult sel = fps(gt, result.stages[i].size(), lexicographic_min_index(gt));
    PointCloud target;
    target.points.reserve(sel.count());
    for (int idx : sel.indices) target.points.push_back(gt[idx]);
    per_stage[i] = chamfer_l1(result.stages[i], target).value;
  }
  return breakdown_from(per_stage);
}

TrainResult train_toy(ToyTask task, int iters, uint64_t seed, const PipelineConfig& cfg,
                      const TrainOptions& opts) {
  if (iters < 1) throw Error(ErrorCode::BadArgument, "iters must be >= 1");
  if (opts.batch < 1) throw Error(ErrorCode::BadArgument, "batch must be >= 1");

  PipelineConfig train_cfg = cfg;
  train_cfg.seed = seed;

  Rng task_rng(Rng::derive(seed, "toy/" + toy_task_name(task)));
  std::vector<ToyInstance> instances;
  instances.reserve(opts.batch);
  for (int i = 0; i < opts.batch; ++i) {
    instances.push_back(sample_toy(task, opts.gt_points, opts.partial_points, task_rng));
  }

  TrainResult result;
  result.params = init_params(train_cfg);
  result.curve.reserve(iters);

  for (int it = 0; it < iters; ++it) {
    Tape t;
    ParamBinder binder(t, result.params);
    NodeId total = -1;
    std::array<double, 4> stage_acc{};
    for (const ToyInstance& inst : instances) {
      const PipelineNodes nodes = record_complete(t, inst.partial, train_cfg, binder);
      const NodeId inst_loss = record_loss(t, nodes, inst.ground_truth);
      total = total < 0 ? inst_loss : t.add(total, inst_loss);
      for (size_t s = 0; s < nodes.stage_coords.size(); ++s) {
        // recover the per-stage terms for the curve
        const SampleResult sel =
            fps(inst.ground_truth, t.value(nodes.stage_coords[s]).rows,
                lexicographic_min_index(inst.ground_truth));
        PointCloud target;
        for (int idx : sel.indices) target.points.push_back(inst.ground_truth[idx]);
        stage_acc[s] += chamfer_l1(cloud_of(t, nodes.stage_coords[s]), target).value;
      }
    }
    const NodeId mean_loss = t.scale(total, 1.0 / opts.batch);
    for (double& v : stage_acc) v /= opts.batch;
    result.curve.push_back(breakdown_from(stage_acc));

    const auto grads = t.backward(mean_loss);
    const double lr_eff = train_cfg.lr * std::pow(0.1, it / std::max(1, train_cfg.lr_step));
    result.params.adam_step(grads, lr_eff, train_cfg.beta1, train_cfg.beta2);
  }
  return result;
}

}  // namespace dfg
