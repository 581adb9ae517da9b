#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "specband/autodiff.hpp"

namespace specband {

enum class Padding { Same, Valid };

// Linear algebra.
Var matmul(Var a, Var b);  // [m x n] * [n x p]
Var transpose(Var a);      // rank-2 only
Var reshape(Var a, Shape shape);

// Elementwise, identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

// Broadcasts. "Row" is a slice along axis 0 of any-rank `a`; b has a.dim(0)
// entries. "Col" broadcasts a vector of the trailing dimension over all rows.
Var add_per_row(Var a, Var b);
Var mul_per_row(Var a, Var b);
Var add_per_col(Var a, Var b);
Var mul_per_col(Var a, Var b);

Var sigmoid(Var a);
Var relu(Var a);
Var gelu(Var a);  // exact erf form

/// Numerically stable softmax along `axis` (max subtracted before exp).
Var softmax(Var a, std::size_t axis);

Var sum(Var a);   // -> [1]
Var mean(Var a);  // -> [1]
/// Mean over the trailing axes of a [C x ...] tensor -> [C].
Var global_avg_pool(Var x);

/// Concatenation along axis 0; trailing dimensions must agree.
Var concat(std::span<const Var> parts);
/// a[:, cols] for a rank-2 tensor, in the given order.
Var gather_columns(Var a, std::span<const std::size_t> cols);
/// a[idx] for a rank-1 tensor.
Var gather(Var a, std::span<const std::size_t> idx);

/// Cross-correlation of x [C_in x H x W] with kernels [C_out x C_in x kh x kw].
Var conv2d(Var x, Var kernels, Padding padding);
/// Cross-correlation of x [C_in x D x H x W] with kernels [C_out x C_in x kd x kh x kw].
Var conv3d(Var x, Var kernels, Padding padding);

/// Mean softmax cross-entropy of logits [B x C] against 0-based class ids.
Var cross_entropy(Var logits, std::span<const int> labels);

}  // namespace specband
