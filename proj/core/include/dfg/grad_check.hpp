#pragma once

#include <functional>
#include <map>
#include <string>

#include "dfg/param_store.hpp"
#include "dfg/tape.hpp"

namespace dfg {

struct GradReport {
  std::map<std::string, double> max_rel_err;  // per parameter, over sampled coords
  double overall = 0.0;
  int checked = 0;
  int excluded = 0;  // coordinates whose difference quotient straddled a kink

  bool passed(double tol) const { return overall <= tol && checked > 0; }
};

/// Builds a scalar loss from the current parameter values. Called several
/// times per check; must be deterministic given the store contents.
using TapeBuilder = std::function<NodeId(Tape&, ParamBinder&)>;

/// Compares reverse-mode gradients against central differences
/// (f(x+eps) - f(x-eps)) / (2 eps) on a seeded random sample of roughly
/// `sample_fraction` of each tensor's coordinates (at least one per tensor).
///
/// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
/// A coordinate is excluded (counted, not checked) when the perturbed
/// forwards disagree with the center forward on any discrete branch: an
/// abs/relu sign flip, argmin/argmax rerouting, or a changed sampling /
/// graph selection. Across such a kink the difference quotient does not
/// estimate the one-sided derivative the backward pass computes.
GradReport grad_check(const TapeBuilder& f, ParamStore& params, double eps = 1e-4,
                      uint64_t seed = 0, double sample_fraction = 0.05);

}  // namespace dfg
