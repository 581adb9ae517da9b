#include "specband/params.hpp"

namespace specband {

Tensor uniform_param(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.storage()) v = rng.uniform(-bound, bound);
  t.set_requires_grad(true);
  return t;
}

Tensor constant_param(Shape shape, double value) {
  Tensor t(std::move(shape), value);
  t.set_requires_grad(true);
  return t;
}

std::size_t count_scalars(const ParamList& params) {
  std::size_t total = 0;
  for (const auto& [name, tensor] : params) total += tensor->size();
  return total;
}

}  // namespace specband
