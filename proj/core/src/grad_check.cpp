#include "dfg/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "dfg/error.hpp"
#include "dfg/rng.hpp"

namespace dfg {

namespace {

struct Probe {
  double value = 0.0;
  uint64_t structure = 0;
};

Probe run_forward(const TapeBuilder& f, ParamStore& params) {
  Tape tape;
  ParamBinder binder(tape, params);
  const NodeId loss = f(tape, binder);
  const Matrix& lv = tape.value(loss);
  if (lv.rows != 1 || lv.cols != 1) {
    throw Error(ErrorCode::NotScalarLoss, "grad_check requires a scalar loss");
  }
  return {lv.at(0, 0), tape.structure_hash()};
}

}  // namespace

GradReport grad_check(const TapeBuilder& f, ParamStore& params, double eps, uint64_t seed,
                      double sample_fraction) {
  // Analytic pass.
  Tape tape;
  ParamBinder binder(tape, params);
  const NodeId loss = f(tape, binder);
  const Matrix& lv = tape.value(loss);
  if (lv.rows != 1 || lv.cols != 1) {
    throw Error(ErrorCode::NotScalarLoss, "grad_check requires a scalar loss");
  }
  const uint64_t center_structure = tape.structure_hash();
  const auto analytic = tape.backward(loss);

  GradReport report;
  for (const std::string& name : params.names()) {
    const auto git = analytic.find(name);
    if (git == analytic.end()) continue;
    const Matrix& grad = git->second;
    const int n = static_cast<int>(grad.data.size());

    Rng rng(Rng::derive(seed, "grad_check/" + name));
    const int want = std::max(1, static_cast<int>(std::llround(sample_fraction * n)));
    std::vector<int> coords(n);
    for (int i = 0; i < n; ++i) coords[i] = i;
    // partial Fisher-Yates: first `want` entries become the sample
    for (int i = 0; i < want && i < n - 1; ++i) {
      const int j = i + rng.uniform_int(n - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(std::min(want, n));

    double worst = 0.0;
    Matrix& theta = params.value(name);
    for (int c : coords) {
      const double saved = theta.data[c];

      theta.data[c] = saved + eps;
      const Probe plus = run_forward(f, params);
      theta.data[c] = saved - eps;
      const Probe minus = run_forward(f, params);
      theta.data[c] = saved;

      // The two endpoint forwards (and the center) must have taken the same
      // branch everywhere; otherwise the difference quotient straddles a
      // kink and cannot arbitrate against the one-sided analytic gradient.
      if (plus.structure != center_structure || minus.structure != center_structure) {
        ++report.excluded;
        continue;
      }

      const double numeric = (plus.value - minus.value) / (2.0 * eps);
      const double a = grad.data[c];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      worst = std::max(worst, std::fabs(a - numeric) / denom);
      ++report.checked;
    }
    report.max_rel_err[name] = worst;
    report.overall = std::max(report.overall, worst);
  }
  return report;
}

}  // namespace dfg
