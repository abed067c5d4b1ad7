#pragma once

#include <vector>

#include "dfg/matrix.hpp"

namespace dfg {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool finite() const;
};

Point3 operator+(const Point3& a, const Point3& b);
Point3 operator-(const Point3& a, const Point3& b);
Point3 operator*(const Point3& a, double s);
bool operator==(const Point3& a, const Point3& b);

double squared_distance(const Point3& a, const Point3& b);
double distance(const Point3& a, const Point3& b);

/// Ordered list of 3D points. Order is significant: indices are identities
/// throughout the library (graphs, samples and feature rows refer to them).
struct PointCloud {
  std::vector<Point3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

  int size() const { return static_cast<int>(points.size()); }
  bool empty() const { return points.empty(); }
  const Point3& operator[](int i) const { return points[i]; }
  Point3& operator[](int i) { return points[i]; }

  bool all_finite() const;

  /// Coordinates as an N x 3 matrix (row i = point i).
  Matrix as_matrix() const;
  static PointCloud from_matrix(const Matrix& m);
};

struct NormalizeResult {
  PointCloud cloud;
  double scale = 1.0;   // max bounding-box extent (1 for degenerate clouds)
  Point3 offset;        // bounding-box center of the input
};

/// Maps the cloud into [-0.5, 0.5]^3 by centering on the bounding-box center
/// and dividing by the largest extent. Degenerate clouds (single point or all
/// points identical) map to the origin with scale 1.
NormalizeResult normalize_unit_cube(const PointCloud& cloud);

/// Inverse of normalize_unit_cube: p * scale + offset.
PointCloud denormalize(const PointCloud& cloud, double scale, const Point3& offset);

/// Index of the lexicographically smallest point (x, then y, then z).
/// A permutation-covariant anchor used to start farthest point sampling
/// wherever the result must not depend on input point order.
int lexicographic_min_index(const PointCloud& cloud);

}  // namespace dfg
