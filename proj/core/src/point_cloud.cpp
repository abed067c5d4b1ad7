#include "dfg/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "dfg/error.hpp"

namespace dfg {

bool Point3::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Point3 operator*(const Point3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
bool operator==(const Point3& a, const Point3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

double distance(const Point3& a, const Point3& b) { return std::sqrt(squared_distance(a, b)); }

bool PointCloud::all_finite() const {
  return std::all_of(points.begin(), points.end(), [](const Point3& p) { return p.finite(); });
}

Matrix PointCloud::as_matrix() const {
  Matrix m(size(), 3);
  for (int i = 0; i < size(); ++i) {
    m.at(i, 0) = points[i].x;
    m.at(i, 1) = points[i].y;
    m.at(i, 2) = points[i].z;
  }
  return m;
}

PointCloud PointCloud::from_matrix(const Matrix& m) {
  if (m.cols != 3) throw Error(ErrorCode::ShapeMismatch, "point matrix must have 3 columns");
  PointCloud c;
  c.points.resize(m.rows);
  for (int i = 0; i < m.rows; ++i) c.points[i] = {m.at(i, 0), m.at(i, 1), m.at(i, 2)};
  return c;
}

NormalizeResult normalize_unit_cube(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot normalize an empty cloud");
  Point3 lo = cloud[0], hi = cloud[0];
  for (const Point3& p : cloud.points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Point3 center = (lo + hi) * 0.5;
  double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  if (extent < 1e-300) extent = 1.0;  // degenerate: every point identical

  NormalizeResult out;
  out.scale = extent;
  out.offset = center;
  out.cloud.points.reserve(cloud.points.size());
  for (const Point3& p : cloud.points) {
    out.cloud.points.push_back((p - center) * (1.0 / extent));
  }
  return out;
}

PointCloud denormalize(const PointCloud& cloud, double scale, const Point3& offset) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const Point3& p : cloud.points) out.points.push_back(p * scale + offset);
  return out;
}

int lexicographic_min_index(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "empty cloud has no points");
  int best = 0;
  for (int i = 1; i < cloud.size(); ++i) {
    const Point3& p = cloud[i];
    const Point3& q = cloud[best];
    if (std::tie(p.x, p.y, p.z) < std::tie(q.x, q.y, q.z)) best = i;
  }
  return best;
}

}  // namespace dfg
