#include "dfg/detail_metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dfg/error.hpp"
#include "dfg/sampling.hpp"

namespace dfg {

DetailField detail_richness(const Matrix& q, const Matrix& q_down_up, const Matrix& h_prev) {
  if (!q.same_shape(q_down_up) || !q.same_shape(h_prev)) {
    throw Error(ErrorCode::ShapeMismatch, "detail_richness inputs must share one N x C shape");
  }
  DetailField d;
  d.values.resize(q.rows, 0.0);
  for (int i = 0; i < q.rows; ++i) {
    double acc = 0.0;
    for (int c = 0; c < q.cols; ++c) {
      acc += std::fabs(q.at(i, c) - q_down_up.at(i, c));
      acc += std::fabs(q.at(i, c) - h_prev.at(i, c));
    }
    d.values[i] = acc;
  }
  return d;
}

Matrix down_up_features(const PointCloud& cloud, const Matrix& q, int s, int start) {
  if (q.rows != cloud.size()) {
    throw Error(ErrorCode::ShapeMismatch, "feature rows must match cloud size");
  }
  if (s < 1) throw Error(ErrorCode::BadArgument, "downsample ratio s must be >= 1");
  if (s == 1) return q;

  const int n = cloud.size();
  const int m = (n + s - 1) / s;
  if (m < 1) throw Error(ErrorCode::EmptyAfterDownsample, "downsample leaves no points");

  const SampleResult sel = fps(cloud, m, start);
  PointCloud coarse;
  coarse.points.reserve(m);
  Matrix coarse_feats(m, q.cols);
  for (int i = 0; i < m; ++i) {
    coarse.points.push_back(cloud[sel.indices[i]]);
    for (int c = 0; c < q.cols; ++c) coarse_feats.at(i, c) = q.at(sel.indices[i], c);
  }
  return interpolate_up(coarse, coarse_feats, cloud);
}

long DegreeAssignment::total() const {
  return std::accumulate(degrees.begin(), degrees.end(), 0L);
}

DegreeAssignment allocate_degrees(const DetailField& detail, const CurvatureField& kappa,
                                  double alpha, int d_min, int d_max, ShareMode mode) {
  const int n = detail.size();
  if (n == 0 || kappa.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "detail and curvature lengths must match and be >= 1");
  }
  if (!(alpha > 0.0)) throw Error(ErrorCode::BadAlpha, "alpha must be > 0");
  if (d_min < 0 || d_min > d_max || d_max > n - 1) {
    throw Error(ErrorCode::BadArgument, "need 0 <= d_min <= d_max <= N-1");
  }

  const double max_d = *std::max_element(detail.values.begin(), detail.values.end());
  const auto [k_lo_it, k_hi_it] = std::minmax_element(kappa.kappa.begin(), kappa.kappa.end());
  const double k_lo = *k_lo_it, k_hi = *k_hi_it;

  // Rescale curvature onto the detail metric's value range so the budget
  // terms are commensurate. A constant kappa (zero spread) passes through.
  std::vector<double> kappa_scaled(kappa.kappa);
  if (max_d > 0.0 && k_hi - k_lo > 1e-15) {
    for (double& v : kappa_scaled) v = (v - k_lo) / (k_hi - k_lo) * max_d;
  }

  double sum_d = 0.0, sum_k = 0.0;
  for (int i = 0; i < n; ++i) {
    sum_d += detail.values[i];
    sum_k += kappa_scaled[i];
  }
  const double budget = alpha * (sum_d + sum_k);

  DegreeAssignment out;
  out.budget = budget;
  out.alpha = alpha;
  out.d_min = d_min;
  out.d_max = d_max;
  out.degrees.resize(n);
  out.pre_clamp.resize(n);

  auto clamp_deg = [&](long v) { return static_cast<int>(std::clamp<long>(v, d_min, d_max)); };

  if (sum_d < 1e-12) {
    const long uniform = std::lround(budget / n);
    for (int i = 0; i < n; ++i) {
      out.pre_clamp[i] = static_cast<int>(uniform);
      out.degrees[i] = clamp_deg(uniform);
    }
    return out;
  }

  double share_total = sum_d;
  if (mode == ShareMode::DetailPlusCurvature) share_total = sum_d + sum_k;
  for (int i = 0; i < n; ++i) {
    double share = detail.values[i];
    if (mode == ShareMode::DetailPlusCurvature) share += kappa_scaled[i];
    const double raw = budget * share / share_total;
    const long rounded = std::llround(raw);  // half away from zero
    out.pre_clamp[i] = static_cast<int>(rounded);
    out.degrees[i] = clamp_deg(rounded);
  }
  return out;
}

}  // namespace dfg
