#pragma once

#include <array>
#include <vector>

#include "dfg/point_cloud.hpp"

namespace dfg {

/// Per-point surface-variation curvature: the smallest covariance eigenvalue
/// of the local neighborhood over the eigenvalue sum. Bounded in [0, 1/3];
/// 0 for planar or degenerate neighborhoods.
struct CurvatureField {
  std::vector<double> kappa;
  int k_used = 0;

  int size() const { return static_cast<int>(kappa.size()); }
};

/// Covariance is taken over each point's k_c nearest neighbors plus the
/// point itself. Requires 3 <= k_c <= N-1.
CurvatureField estimate_curvature(const PointCloud& cloud, int k_c);

/// Scaled L1 distance: gamma * (|dx| + |dy| + |dz|).
double manhattan(const Point3& a, const Point3& b, double gamma);

/// Eigenvalues of a symmetric 3x3 matrix, descending. Closed-form
/// trigonometric solution; exposed for reuse in diagnostics.
std::array<double, 3> symmetric3_eigenvalues(const std::array<double, 6>& m);
// m packs the upper triangle: {xx, xy, xz, yy, yz, zz}

}  // namespace dfg
