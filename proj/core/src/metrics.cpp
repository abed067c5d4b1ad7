#include "dfg/metrics.hpp"

#include <cmath>

#include "dfg/error.hpp"

namespace dfg {

namespace {

void require_nonempty(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyCloud, "metric on empty cloud");
}

double mean_nn(const PointCloud& from, const PointCloud& to, bool squared) {
  double acc = 0.0;
  for (const Point3& p : from.points) {
    double best = squared_distance(p, to[0]);
    for (int j = 1; j < to.size(); ++j) best = std::min(best, squared_distance(p, to[j]));
    acc += squared ? best : std::sqrt(best);
  }
  return acc / from.size();
}

}  // namespace

MetricValue chamfer_l1(const PointCloud& p, const PointCloud& s) {
  require_nonempty(p, s);
  return {mean_nn(p, s, false) + mean_nn(s, p, false), MetricKind::CDL1, 1.0};
}

MetricValue chamfer_l2(const PointCloud& p, const PointCloud& s) {
  require_nonempty(p, s);
  return {mean_nn(p, s, true) + mean_nn(s, p, true), MetricKind::CDL2, 1.0};
}

MetricValue fidelity(const PointCloud& input_partial, const PointCloud& output) {
  require_nonempty(input_partial, output);
  return {mean_nn(input_partial, output, false), MetricKind::FD, 1.0};
}

}  // namespace dfg
