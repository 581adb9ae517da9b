#pragma once

#include <functional>
#include <span>

#include "specband/autodiff.hpp"

namespace specband {

/// Builds a scalar-valued graph reading the leaves through Graph::param().
using ScalarFn = std::function<Var(Graph&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;  // number of scalar leaf entries compared
};

/// Compares reverse-mode gradients with central differences
/// (f(x+h) - f(x-h)) / 2h for every element of every leaf.
///
/// Error per element is |analytic - numeric| / max(1, |analytic|). Leaf grads
/// are zeroed before the analytic pass and restored to zero afterwards; leaf
/// values are restored exactly. Throws NonFiniteGradient if either gradient is
/// not finite.
GradCheckResult finite_diff_check(const ScalarFn& f, std::span<Tensor* const> leaves, double h = 1e-6);

}  // namespace specband
