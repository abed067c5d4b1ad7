#pragma once

#include <string>
#include <vector>

#include "dfg/detail_metric.hpp"
#include "dfg/matrix.hpp"
#include "dfg/point_cloud.hpp"

namespace dfg {

enum class GraphChannel { Local, Global };

/// Directed adjacency in compressed form. Node j's out-edges live in
/// targets[offsets[j] .. offsets[j+1]), ordered nearest-first. Out-degree of
/// node j equals degrees[j]; no self loops, no duplicate targets.
struct FlexGraph {
  int n_nodes = 0;
  std::vector<int> offsets;  // length n_nodes + 1
  std::vector<int> targets;  // length sum(degrees)
  GraphChannel channel = GraphChannel::Local;
  std::vector<int> degrees;

  int edge_count() const { return static_cast<int>(targets.size()); }
  int degree(int j) const { return offsets[j + 1] - offsets[j]; }

  /// Throws on any structural violation (used by tests and debug paths).
  void validate() const;
};

/// Membership predicate over ordered pairs, built once from a graph.
/// connected(j, k) answers whether the directed edge j -> k exists.
class EdgeMask {
 public:
  explicit EdgeMask(const FlexGraph& g);
  bool connected(int j, int k) const;
  bool operator()(int j, int k) const { return connected(j, k); }

 private:
  int n_ = 0;
  std::vector<int> offsets_;
  std::vector<int> sorted_targets_;  // per-node sorted for binary search
};

inline EdgeMask mask_matrix(const FlexGraph& g) { return EdgeMask(g); }

/// Connects node i to its degrees[i] nearest Euclidean neighbors (self
/// excluded, distance ties to the lower index). Uniform degrees k reproduce
/// the plain kNN graph.
FlexGraph build_local_graph(const PointCloud& cloud, const DegreeAssignment& degrees);

struct AnchorSet {
  std::vector<int> indices;  // node ids in FPS selection order
  Matrix features;           // gathered rows, one per anchor
};

/// FPS-samples min(anchor_count, N) anchors, then connects node i to its
/// clamp(ceil(degrees[i]/2), 1, n_anchors - [i is an anchor]) most
/// feature-similar anchors (Euclidean distance in feature space, ties to the
/// lower node index, self excluded).
std::pair<FlexGraph, AnchorSet> build_global_graph(const PointCloud& cloud, const Matrix& feats,
                                                   const DegreeAssignment& degrees,
                                                   int anchor_count = 512, int fps_start = 0);

/// Serializes a graph as a JSON object with fields n_nodes, channel,
/// offsets, targets, degrees. Deterministic byte output.
std::string graph_to_json(const FlexGraph& g);

}  // namespace dfg
