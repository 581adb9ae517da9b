#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "specband/autodiff.hpp"
#include "specband/params.hpp"

namespace specband {

/// Band scoring weights.
///
/// The aggregation map reduces each row of the c x k_f attention map to one
/// score. The gate is a two-layer MLP (hw -> hidden -> 1) applied to every
/// band's spatial column with weights shared across bands.
struct KbsmParams {
  Tensor agg_w;    // [k_f x 1]
  Tensor agg_b;    // [1]
  Tensor gate_w1;  // [hw x hidden]
  Tensor gate_b1;  // [hidden]
  Tensor gate_w2;  // [hidden x 1]
  Tensor gate_b2;  // [1]

  static KbsmParams init(std::size_t hw, std::size_t k_f, Rng& rng);
  void collect(const std::string& prefix, ParamList& out);
};

/// max(8, hw / 4).
std::size_t gate_hidden_width(std::size_t hw);

/// c-vectors; weighted = v * g elementwise.
struct BandScore {
  Var v;
  Var g;
  Var weighted;
};

struct BandSelection {
  std::vector<std::size_t> indices;  // strictly increasing
  std::size_t k = 0;
  double ratio = 1.0;
};

/// ceil(ratio * c) clamped to [1, c]. A relative slack of 1e-9 absorbs
/// round-off in ratio * c so that 0.2 * 30 gives 6. Throws InvalidArgument
/// unless 0 < ratio <= 1.
std::size_t retained_count(double ratio, std::size_t bands);

/// A = X^T Z for X [hw x c], Z [hw x k_f] -> [c x k_f].
Var attention_map(Var x, Var z);

BandScore score_bands(Var a, Var x, KbsmParams& params);

/// Indices of the k largest entries, ties toward the lower index, returned in
/// ascending order.
BandSelection select_topk(std::span<const double> weighted, double ratio);

/// Columns of X at the selected indices; gradient reaches only those columns.
Var gather_bands(Var x, const BandSelection& selection);

struct KbsmOutput {
  Var selected;  // [hw x k]
  BandSelection selection;
  BandScore score;
};

KbsmOutput kbsm_forward(Var x, Var z, KbsmParams& params, double ratio);

}  // namespace specband
