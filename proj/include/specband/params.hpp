#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "specband/rng.hpp"
#include "specband/tensor.hpp"

namespace specband {

/// Named, stable-ordered view of a module's trainable tensors. The order is
/// the serialization and optimizer order.
using ParamList = std::vector<std::pair<std::string, Tensor*>>;

/// Trainable tensor filled from U(-bound, bound).
Tensor uniform_param(Shape shape, double bound, Rng& rng);
/// Trainable tensor with a constant fill.
Tensor constant_param(Shape shape, double value);

std::size_t count_scalars(const ParamList& params);

}  // namespace specband
