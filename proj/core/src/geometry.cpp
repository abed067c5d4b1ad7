#include "dfg/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "dfg/error.hpp"
#include "dfg/sampling.hpp"

namespace dfg {

std::array<double, 3> symmetric3_eigenvalues(const std::array<double, 6>& m) {
  const double a = m[0], b = m[3], c = m[5];  // diagonal
  const double d = m[1], e = m[4], f = m[2];  // xy, yz, xz

  const double p1 = d * d + e * e + f * f;
  if (p1 == 0.0) {
    std::array<double, 3> ev{a, b, c};
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
  }
  const double q = (a + b + c) / 3.0;
  const double p2 = (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);

  // r = det((M - q I) / p) / 2, clamped against roundoff before acos.
  const double ba = (a - q) / p, bb = (b - q) / p, bc = (c - q) / p;
  const double bd = d / p, be = e / p, bf = f / p;
  double r = (ba * (bb * bc - be * be) - bd * (bd * bc - be * bf) + bf * (bd * be - bb * bf)) / 2.0;
  r = std::clamp(r, -1.0, 1.0);

  const double phi = std::acos(r) / 3.0;
  const double two_pi_3 = 2.0943951023931953;
  const double l1 = q + 2.0 * p * std::cos(phi);
  const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * two_pi_3);
  const double l2 = 3.0 * q - l1 - l3;
  return {l1, l2, l3};
}

CurvatureField estimate_curvature(const PointCloud& cloud, int k_c) {
  const int n = cloud.size();
  if (k_c < 3) throw Error(ErrorCode::KTooSmall, "curvature needs k_c >= 3");
  if (k_c > n - 1) throw Error(ErrorCode::KTooLarge, "curvature needs k_c <= N-1");

  const NeighborList nbrs = knn_self_excluded(cloud, k_c);

  CurvatureField field;
  field.k_used = k_c;
  field.kappa.resize(n);

  std::vector<Point3> patch(k_c + 1);
  for (int i = 0; i < n; ++i) {
    patch[0] = cloud[i];
    for (int j = 0; j < k_c; ++j) patch[j + 1] = cloud[nbrs[i][j].index];

    Point3 mean{0, 0, 0};
    for (const Point3& p : patch) mean = mean + p;
    mean = mean * (1.0 / patch.size());

    std::array<double, 6> cov{};  // xx, xy, xz, yy, yz, zz
    for (const Point3& p : patch) {
      const Point3 d = p - mean;
      cov[0] += d.x * d.x;
      cov[1] += d.x * d.y;
      cov[2] += d.x * d.z;
      cov[3] += d.y * d.y;
      cov[4] += d.y * d.z;
      cov[5] += d.z * d.z;
    }
    for (double& v : cov) v /= patch.size();

    const double trace = cov[0] + cov[3] + cov[5];
    if (trace < 1e-12) {
      field.kappa[i] = 0.0;  // degenerate cluster
      continue;
    }
    const auto ev = symmetric3_eigenvalues(cov);
    field.kappa[i] = std::clamp(ev[2] / trace, 0.0, 1.0 / 3.0);
  }
  return field;
}

double manhattan(const Point3& a, const Point3& b, double gamma) {
  return gamma * (std::fabs(a.x - b.x) + std::fabs(a.y - b.y) + std::fabs(a.z - b.z));
}

}  // namespace dfg
