#pragma once

#include <string>
#include <vector>

#include "dfg/point_cloud.hpp"
#include "dfg/rng.hpp"

namespace dfg {

/// Synthetic completion tasks: a closed shape with one region removed.
/// Everything fits inside [-0.5, 0.5]^3 so no rescaling is needed.
enum class ToyTask { SphereMinusCap, CubeMinusFace, CylinderMinusHalf };

ToyTask parse_toy_task(const std::string& name);  // "sphere" | "cube" | "cylinder"
std::string toy_task_name(ToyTask task);

struct ToyInstance {
  PointCloud partial;       // the observed fragment
  PointCloud ground_truth;  // dense full shape
};

/// Draws one instance: `gt_points` samples of the full surface and a partial
/// view with the task's region removed, downsampled to `partial_points`.
/// Deterministic given the rng state. The removed region's orientation is
/// drawn per instance.
ToyInstance sample_toy(ToyTask task, int gt_points, int partial_points, Rng& rng);

/// A sphere next to a flat square patch with matched surface density;
/// is_sphere flags which points belong to the curved part. Used to compare
/// degree allocation across curvature regimes.
PointCloud sphere_plane_composite(int n_sphere, int n_plane, Rng& rng,
                                  std::vector<bool>* is_sphere = nullptr);

}  // namespace dfg
