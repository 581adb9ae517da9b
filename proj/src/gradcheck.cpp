#include "specband/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "specband/error.hpp"

namespace specband {
namespace {

double evaluate(const ScalarFn& f) {
  Graph g;
  const Var out = f(g);
  if (out.size() != 1) fail(ErrorKind::ShapeMismatch, "finite_diff_check: f must be scalar");
  return out.value()[0];
}

}  // namespace

GradCheckResult finite_diff_check(const ScalarFn& f, std::span<Tensor* const> leaves, double h) {
  for (Tensor* leaf : leaves) {
    if (!leaf->requires_grad()) leaf->set_requires_grad(true);
    leaf->zero_grad();
  }
  {
    Graph g;
    const Var out = f(g);
    if (out.size() != 1) fail(ErrorKind::ShapeMismatch, "finite_diff_check: f must be scalar");
    g.backward(out);
  }

  GradCheckResult result;
  for (Tensor* leaf : leaves) {
    for (std::size_t i = 0; i < leaf->size(); ++i) {
      const double original = (*leaf)[i];
      (*leaf)[i] = original + h;
      const double up = evaluate(f);
      (*leaf)[i] = original - h;
      const double down = evaluate(f);
      (*leaf)[i] = original;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = leaf->grad()[i];
      if (!std::isfinite(numeric) || !std::isfinite(analytic)) {
        fail(ErrorKind::NonFiniteGradient, "gradient entry " + std::to_string(i) + " is not finite");
      }
      const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
      result.max_rel_error = std::max(result.max_rel_error, err);
      ++result.checked;
    }
    leaf->zero_grad();
  }
  return result;
}

}  // namespace specband
