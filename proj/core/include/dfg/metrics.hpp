#pragma once

#include "dfg/point_cloud.hpp"

namespace dfg {

enum class MetricKind { CDL1, CDL2, FD };

struct MetricValue {
  double value = 0.0;
  MetricKind kind = MetricKind::CDL1;
  double scale_factor = 1.0;  // reporting multiplier, e.g. 1e3

  double scaled() const { return value * scale_factor; }
};

/// Symmetric Chamfer distance, sum-of-means convention:
/// mean over P of the nearest-neighbor distance into S, plus the same with
/// the roles swapped. Exact brute-force scan, accumulation in index order.
MetricValue chamfer_l1(const PointCloud& p, const PointCloud& s);

/// Same structure with squared distances inside the means.
MetricValue chamfer_l2(const PointCloud& p, const PointCloud& s);

/// One-directional: mean nearest-neighbor distance from each input point to
/// the output. Measures how well the observed structure is preserved.
MetricValue fidelity(const PointCloud& input_partial, const PointCloud& output);

}  // namespace dfg
