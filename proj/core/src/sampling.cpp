#include "dfg/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dfg/error.hpp"

namespace dfg {

namespace {

NeighborList knn_impl(const PointCloud& cloud, const PointCloud& queries, int k,
                      bool exclude_same_index) {
  NeighborList out(queries.size());
  std::vector<Neighbor> cand;
  cand.reserve(cloud.size());
  for (int q = 0; q < queries.size(); ++q) {
    cand.clear();
    for (int j = 0; j < cloud.size(); ++j) {
      if (exclude_same_index && j == q) continue;
      cand.push_back({j, squared_distance(queries[q], cloud[j])});
    }
    std::sort(cand.begin(), cand.end(), [](const Neighbor& a, const Neighbor& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      return a.index < b.index;
    });
    cand.resize(k);
    for (auto& n : cand) n.dist = std::sqrt(n.dist);
    out[q] = cand;
  }
  return out;
}

}  // namespace

SampleResult fps(const PointCloud& cloud, int count, int start) {
  const int n = cloud.size();
  if (n < 1) throw Error(ErrorCode::EmptyCloud, "fps on empty cloud");
  if (count < 1 || count > n) {
    throw Error(ErrorCode::CountOutOfRange,
                "fps count " + std::to_string(count) + " not in [1, " + std::to_string(n) + "]");
  }
  if (start < 0 || start >= n) {
    throw Error(ErrorCode::StartOutOfRange, "fps start " + std::to_string(start) + " out of range");
  }

  SampleResult res;
  res.indices.reserve(count);
  res.indices.push_back(start);

  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  int last = start;
  for (int step = 1; step < count; ++step) {
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      min_sq[i] = std::min(min_sq[i], squared_distance(cloud[i], cloud[last]));
      if (min_sq[i] > best_d) {  // strict > keeps the lowest index on ties
        best_d = min_sq[i];
        best = i;
      }
    }
    res.indices.push_back(best);
    last = best;
  }
  return res;
}

NeighborList knn(const PointCloud& cloud, const PointCloud& queries, int k) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "knn on empty cloud");
  if (k < 1 || k > cloud.size()) {
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds cloud size");
  }
  return knn_impl(cloud, queries, k, false);
}

NeighborList knn_self_excluded(const PointCloud& cloud, int k) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "knn on empty cloud");
  if (k < 1 || k > cloud.size() - 1) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds cloud size minus self");
  }
  return knn_impl(cloud, cloud, k, true);
}

Matrix interpolate_up(const PointCloud& coarse, const Matrix& coarse_feats,
                      const PointCloud& fine) {
  if (coarse.empty()) throw Error(ErrorCode::EmptyCloud, "interpolate_up needs >= 1 coarse point");
  if (coarse_feats.rows != coarse.size()) {
    throw Error(ErrorCode::ShapeMismatch, "coarse feature rows do not match coarse cloud");
  }
  const int k = std::min(3, coarse.size());
  const NeighborList nbrs = knn(coarse, fine, k);

  Matrix out(fine.size(), coarse_feats.cols);
  for (int i = 0; i < fine.size(); ++i) {
    const auto& nn = nbrs[i];
    if (nn[0].dist < 1e-12) {
      for (int c = 0; c < out.cols; ++c) out.at(i, c) = coarse_feats.at(nn[0].index, c);
      continue;
    }
    double wsum = 0.0;
    for (const Neighbor& nb : nn) wsum += 1.0 / (nb.dist + 1e-8);
    for (const Neighbor& nb : nn) {
      const double w = (1.0 / (nb.dist + 1e-8)) / wsum;
      for (int c = 0; c < out.cols; ++c) out.at(i, c) += w * coarse_feats.at(nb.index, c);
    }
  }
  return out;
}

}  // namespace dfg
