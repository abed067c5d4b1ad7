#include "dfg/flex_graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "json.hpp"

#include "dfg/error.hpp"
#include "dfg/sampling.hpp"

namespace dfg {

void FlexGraph::validate() const {
  if (static_cast<int>(offsets.size()) != n_nodes + 1 || offsets.front() != 0 ||
      offsets.back() != static_cast<int>(targets.size())) {
    throw Error(ErrorCode::BadArgument, "graph offsets malformed");
  }
  if (static_cast<int>(degrees.size()) != n_nodes) {
    throw Error(ErrorCode::BadArgument, "graph degrees length mismatch");
  }
  for (int j = 0; j < n_nodes; ++j) {
    if (offsets[j + 1] < offsets[j]) throw Error(ErrorCode::BadArgument, "offsets decrease");
    if (offsets[j + 1] - offsets[j] != degrees[j]) {
      throw Error(ErrorCode::BadArgument, "out-degree does not match degrees[]");
    }
    std::unordered_set<int> seen;
    for (int e = offsets[j]; e < offsets[j + 1]; ++e) {
      const int k = targets[e];
      if (k < 0 || k >= n_nodes) throw Error(ErrorCode::BadArgument, "target out of range");
      if (k == j) throw Error(ErrorCode::BadArgument, "self loop");
      if (!seen.insert(k).second) throw Error(ErrorCode::BadArgument, "duplicate target");
    }
  }
}

EdgeMask::EdgeMask(const FlexGraph& g)
    : n_(g.n_nodes), offsets_(g.offsets), sorted_targets_(g.targets) {
  for (int j = 0; j < n_; ++j) {
    std::sort(sorted_targets_.begin() + offsets_[j], sorted_targets_.begin() + offsets_[j + 1]);
  }
}

bool EdgeMask::connected(int j, int k) const {
  if (j < 0 || j >= n_ || k < 0 || k >= n_) return false;
  return std::binary_search(sorted_targets_.begin() + offsets_[j],
                            sorted_targets_.begin() + offsets_[j + 1], k);
}

FlexGraph build_local_graph(const PointCloud& cloud, const DegreeAssignment& degrees) {
  const int n = cloud.size();
  if (degrees.size() != n) throw Error(ErrorCode::LengthMismatch, "degrees length != N");
  int max_deg = 0;
  for (int d : degrees.degrees) max_deg = std::max(max_deg, d);
  if (max_deg > n - 1) {
    throw Error(ErrorCode::DegreeExceedsN, "a requested degree exceeds N-1");
  }

  // One kNN pass at the largest degree, then truncate per node.
  NeighborList nbrs;
  if (max_deg > 0) nbrs = knn_self_excluded(cloud, max_deg);

  FlexGraph g;
  g.n_nodes = n;
  g.channel = GraphChannel::Local;
  g.degrees = degrees.degrees;
  g.offsets.resize(n + 1, 0);
  for (int i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + degrees.degrees[i];
  g.targets.resize(g.offsets[n]);
  for (int i = 0; i < n; ++i) {
    for (int e = 0; e < degrees.degrees[i]; ++e) g.targets[g.offsets[i] + e] = nbrs[i][e].index;
  }
  return g;
}

std::pair<FlexGraph, AnchorSet> build_global_graph(const PointCloud& cloud, const Matrix& feats,
                                                   const DegreeAssignment& degrees,
                                                   int anchor_count, int fps_start) {
  const int n = cloud.size();
  if (n == 0) throw Error(ErrorCode::EmptyCloud, "global graph on empty cloud");
  if (feats.rows != n) throw Error(ErrorCode::ShapeMismatch, "feature rows != N");
  if (degrees.size() != n) throw Error(ErrorCode::LengthMismatch, "degrees length != N");
  if (anchor_count < 1) throw Error(ErrorCode::BadArgument, "anchor_count must be >= 1");

  const int n_anchors = std::min(anchor_count, n);
  const SampleResult sel = fps(cloud, n_anchors, fps_start);

  AnchorSet anchors;
  anchors.indices = sel.indices;
  anchors.features = Matrix(n_anchors, feats.cols);
  for (int a = 0; a < n_anchors; ++a) {
    for (int c = 0; c < feats.cols; ++c) anchors.features.at(a, c) = feats.at(sel.indices[a], c);
  }

  std::vector<bool> is_anchor(n, false);
  for (int idx : sel.indices) is_anchor[idx] = true;

  FlexGraph g;
  g.n_nodes = n;
  g.channel = GraphChannel::Global;
  g.degrees.resize(n);
  g.offsets.resize(n + 1, 0);

  struct Cand {
    int node;
    double dist_sq;
  };
  std::vector<Cand> cand;
  std::vector<std::vector<int>> picks(n);
  for (int i = 0; i < n; ++i) {
    const int avail = n_anchors - (is_anchor[i] ? 1 : 0);
    int want = (degrees.degrees[i] + 1) / 2;  // ceil(d/2)
    want = std::clamp(want, 1, std::max(avail, 0));
    if (avail <= 0) want = 0;  // lone anchor in a 1-point cloud
    g.degrees[i] = want;

    cand.clear();
    for (int idx : sel.indices) {
      if (idx == i) continue;
      double d2 = 0.0;
      for (int c = 0; c < feats.cols; ++c) {
        const double diff = feats.at(i, c) - feats.at(idx, c);
        d2 += diff * diff;
      }
      cand.push_back({idx, d2});
    }
    std::sort(cand.begin(), cand.end(), [](const Cand& a, const Cand& b) {
      if (a.dist_sq != b.dist_sq) return a.dist_sq < b.dist_sq;
      return a.node < b.node;
    });
    picks[i].reserve(want);
    for (int e = 0; e < want; ++e) picks[i].push_back(cand[e].node);
  }

  for (int i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + g.degrees[i];
  g.targets.resize(g.offsets[n]);
  for (int i = 0; i < n; ++i) {
    std::copy(picks[i].begin(), picks[i].end(), g.targets.begin() + g.offsets[i]);
  }
  return {std::move(g), std::move(anchors)};
}

std::string graph_to_json(const FlexGraph& g) {
  nlohmann::json j;
  j["n_nodes"] = g.n_nodes;
  j["channel"] = g.channel == GraphChannel::Local ? "local" : "global";
  j["offsets"] = g.offsets;
  j["targets"] = g.targets;
  j["degrees"] = g.degrees;
  return j.dump();
}

}  // namespace dfg
