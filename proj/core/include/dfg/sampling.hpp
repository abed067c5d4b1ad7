#pragma once

#include <vector>

#include "dfg/matrix.hpp"
#include "dfg/point_cloud.hpp"

namespace dfg {

struct SampleResult {
  std::vector<int> indices;  // selection order = greedy order

  int count() const { return static_cast<int>(indices.size()); }
};

struct Neighbor {
  int index;
  double dist;
};

/// One entry per query, sorted ascending by distance, ties broken by lower
/// index. Self is excluded only by the *_self_excluded variant.
using NeighborList = std::vector<std::vector<Neighbor>>;

/// Greedy max-min farthest point sampling. Deterministic: ties in the
/// max-min step are broken by the lowest index.
SampleResult fps(const PointCloud& cloud, int count, int start = 0);

/// Exact brute-force k-nearest neighbors of each query point within `cloud`.
/// Requires k <= |cloud|.
NeighborList knn(const PointCloud& cloud, const PointCloud& queries, int k);

/// k-NN of every cloud point among the other points (self excluded).
/// Requires k <= |cloud| - 1.
NeighborList knn_self_excluded(const PointCloud& cloud, int k);

/// Inverse-distance feature interpolation from a coarse cloud onto a fine
/// one: each fine point blends its 3 nearest coarse features with weights
/// 1/(d + 1e-8), normalized. A fine point within 1e-12 of a coarse point
/// copies that coarse feature verbatim.
Matrix interpolate_up(const PointCloud& coarse, const Matrix& coarse_feats,
                      const PointCloud& fine);

}  // namespace dfg
