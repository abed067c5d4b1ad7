#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dfg/aggregate.hpp"
#include "dfg/detail_metric.hpp"
#include "dfg/flex_graph.hpp"
#include "dfg/fusion.hpp"
#include "dfg/geometry.hpp"
#include "dfg/matrix.hpp"
#include "dfg/param_store.hpp"
#include "dfg/point_cloud.hpp"
#include "dfg/tape.hpp"
#include "dfg/toy_tasks.hpp"

namespace dfg {

/// Which neighbor channels feed the fusion stage. The single-channel modes
/// zero out the other channel's aggregate while keeping the parameter set
/// identical, so ablation runs are directly comparable.
enum class GraphChannels { Both, LocalOnly, GlobalOnly };

/// Source of H_0, the feature stream entering the first block.
enum class InitialFeatures { Seed, Zeros };

struct PipelineConfig {
  int width = 16;  // feature channels C
  int n0 = 64;     // seed cloud size
  int nc = 64;     // candidate points emitted by the seed generator
  std::array<int, 3> ratios{2, 2, 2};

  double alpha = 4.0;  // degree budget scale
  double gamma = 1.0;  // L1-distance weight in edge logits
  int d_min = 4;
  int d_max = 32;  // effective cap is min(d_max, N-1) at each stage
  int anchor_count = 512;
  int s = 3;             // down/up ratio for the detail metric
  int k_c = 16;          // curvature neighborhood
  int extractor_k = 16;  // pooling neighborhood in the feature extractor

  GraphChannels channels = GraphChannels::Both;
  InitialFeatures h0 = InitialFeatures::Seed;
  ShareMode share_mode = ShareMode::DetailOnly;
  double offset_clamp = 0.1;      // tanh scale on per-stage offsets
  double seed_offset_clamp = 0.5; // tanh scale on seed candidates

  uint64_t seed = 42;  // parameter init seed

  // training
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  int lr_step = 100;  // lr multiplies by 0.1 after every lr_step iterations
};

/// Per-block forward diagnostics, in block order.
struct StageDiagnostics {
  DetailField detail;
  CurvatureField curvature;
  DegreeAssignment degrees;
};

struct CompletionResult {
  std::vector<PointCloud> stages;  // P_0 .. P_3
  std::vector<Matrix> features;    // H_0 .. H_3
  Matrix global_feature;           // 1 x C
  std::vector<StageDiagnostics> diagnostics;  // one per block
};

struct LossBreakdown {
  double total = 0.0;
  std::array<double, 4> per_stage{};
};

/// Creates every learnable tensor with uniform(-1/sqrt(fan_in), ..) init
/// derived from cfg.seed. Names are stable across runs and platforms.
ParamStore init_params(const PipelineConfig& cfg);

// ---- plain forward API ----

/// Lite hierarchical extractor: per-point affine+relu, max-pool over the
/// extractor_k neighborhood, FPS halving, three rounds; global feature is
/// the channel-wise max, per-point features are interpolated back to full
/// resolution. Requires N >= 16.
std::pair<Matrix, Matrix> extract_features(const PointCloud& partial, const PipelineConfig& cfg,
                                           const ParamStore& params);
// returns {global_f (1 x C), per_point (N x C)}

/// Lite seed generator: offsets FPS-selected base points by a bounded MLP of
/// (global feature, per-point feature), unions the candidates with the
/// input, and FPS-selects n0 seed points (with their features).
std::pair<PointCloud, Matrix> generate_seed(const PointCloud& partial, const Matrix& global_f,
                                            const Matrix& per_point, const PipelineConfig& cfg,
                                            const ParamStore& params);

/// One upsampling block: per-point features, detail metric, degree
/// allocation, local/global graph aggregation, two-stage fusion, offset
/// upsampling by ratios[block_index].
std::pair<PointCloud, Matrix> dfg_block(const PointCloud& p_prev, const Matrix& h_prev,
                                        const Matrix& global_f, int block_index,
                                        const PipelineConfig& cfg, const ParamStore& params,
                                        StageDiagnostics* diag = nullptr);

/// Full coarse-to-fine completion: extractor, seed, three blocks.
CompletionResult complete(const PointCloud& partial, const PipelineConfig& cfg,
                          const ParamStore& params);

/// Multi-scale training loss: Chamfer distance of every stage against an
/// FPS subset of the ground truth at the matching size.
LossBreakdown loss(const CompletionResult& result, const PointCloud& gt);

// ---- tape-recorded forward (single implementation behind the plain API) ----

struct PipelineNodes {
  std::vector<NodeId> stage_coords;  // P_0 .. P_3
  std::vector<NodeId> stage_feats;   // H_0 .. H_3
  NodeId global_f = -1;
  NodeId per_point = -1;
  std::vector<StageDiagnostics> diagnostics;
};

PipelineNodes record_complete(Tape& t, const PointCloud& partial, const PipelineConfig& cfg,
                              ParamBinder& params);

/// Chamfer-l1 between a recorded coordinate node and a fixed cloud.
NodeId record_chamfer_l1(Tape& t, NodeId coords, const PointCloud& fixed);

/// Sum of per-stage Chamfer terms against FPS subsets of gt.
NodeId record_loss(Tape& t, const PipelineNodes& nodes, const PointCloud& gt);

/// Inverse-distance interpolation on tape; indices and the coincidence mask
/// come from current values and are folded into the structure hash.
NodeId record_interpolate(Tape& t, NodeId coarse_coords, NodeId coarse_feats, NodeId fine_coords);

// ---- toy training ----

struct TrainResult {
  ParamStore params;
  std::vector<LossBreakdown> curve;  // one entry per iteration
};

struct TrainOptions {
  int batch = 2;           // fixed instances, cycled every iteration
  int gt_points = 1024;
  int partial_points = 256;
};

/// Adam on the multi-scale loss over `iters` iterations. Deterministic:
/// instances, init and update order all derive from `seed`.
TrainResult train_toy(ToyTask task, int iters, uint64_t seed, const PipelineConfig& cfg,
                      const TrainOptions& opts = {});

}  // namespace dfg
