#pragma once

#include <vector>

#include "dfg/geometry.hpp"
#include "dfg/matrix.hpp"
#include "dfg/point_cloud.hpp"

namespace dfg {

/// Per-point detail richness: channel sum of |Q - Q_down_up| plus channel
/// sum of |Q - H_prev|. High values mark regions whose features survive
/// neither resampling nor the previous stage, i.e. regions needing work.
struct DetailField {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
};

DetailField detail_richness(const Matrix& q, const Matrix& q_down_up, const Matrix& h_prev);

/// FPS-downsamples the cloud to ceil(N/s) points, gathers the corresponding
/// feature rows, and interpolates them back to all N points. s == 1 returns
/// q unchanged. `start` seeds the FPS pass.
Matrix down_up_features(const PointCloud& cloud, const Matrix& q, int s, int start = 0);

/// Whether per-point connection shares follow the detail metric alone or
/// detail plus (rescaled) curvature.
enum class ShareMode { DetailOnly, DetailPlusCurvature };

struct DegreeAssignment {
  std::vector<int> degrees;    // clamped to [d_min, d_max]
  std::vector<int> pre_clamp;  // rounded shares before clamping
  double budget = 0.0;         // B
  double alpha = 0.0;
  int d_min = 0;
  int d_max = 0;

  int size() const { return static_cast<int>(degrees.size()); }
  long total() const;
};

/// Splits a connection budget B = alpha * sum(D_i + kappa'_i) across points
/// in proportion to their detail values, rounding half away from zero and
/// clamping to [d_min, d_max].
///
/// kappa' is kappa min-max rescaled onto [0, max(D)] so the two budget terms
/// share a scale; a constant kappa has no spread to rescale and enters as-is.
/// When sum(D) < 1e-12 every point gets clamp(round(B/N)).
DegreeAssignment allocate_degrees(const DetailField& detail, const CurvatureField& kappa,
                                  double alpha, int d_min, int d_max,
                                  ShareMode mode = ShareMode::DetailOnly);

}  // namespace dfg
