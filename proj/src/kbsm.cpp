#include "specband/kbsm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "specband/error.hpp"
#include "specband/ops.hpp"

namespace specband {

std::size_t gate_hidden_width(std::size_t hw) { return std::max<std::size_t>(8, hw / 4); }

KbsmParams KbsmParams::init(std::size_t hw, std::size_t k_f, Rng& rng) {
  const std::size_t hidden = gate_hidden_width(hw);
  KbsmParams p;
  // Standard fan-in bound. Scores start dominated by the cross-source term
  // rather than the bias, so the initial ranking already follows the guidance.
  p.agg_w = uniform_param({k_f, 1}, 1.0 / std::sqrt(static_cast<double>(k_f)), rng);
  p.agg_b = constant_param({1}, 0.0);
  p.gate_w1 = uniform_param({hw, hidden}, 1.0 / std::sqrt(static_cast<double>(hw)), rng);
  p.gate_b1 = constant_param({hidden}, 0.0);
  p.gate_w2 = uniform_param({hidden, 1}, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  p.gate_b2 = constant_param({1}, 0.0);
  return p;
}

void KbsmParams::collect(const std::string& prefix, ParamList& out) {
  out.emplace_back(prefix + "agg_w", &agg_w);
  out.emplace_back(prefix + "agg_b", &agg_b);
  out.emplace_back(prefix + "gate_w1", &gate_w1);
  out.emplace_back(prefix + "gate_b1", &gate_b1);
  out.emplace_back(prefix + "gate_w2", &gate_w2);
  out.emplace_back(prefix + "gate_b2", &gate_b2);
}

std::size_t retained_count(double ratio, std::size_t bands) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "band ratio must lie in (0, 1], got " + std::to_string(ratio));
  }
  const double exact = ratio * static_cast<double>(bands);
  const auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(bands, 1));
}

Var attention_map(Var x, Var z) {
  if (x.shape().size() != 2 || z.shape().size() != 2 || x.dim(0) != z.dim(0)) {
    fail(ErrorKind::ShapeMismatch, "attention_map: X " + shape_string(x.shape()) + " and Z " +
                                       shape_string(z.shape()) + " must be [hw x c] and [hw x k_f]");
  }
  return matmul(transpose(x), z);
}

BandScore score_bands(Var a, Var x, KbsmParams& params) {
  Graph& g = a.graph();
  if (a.shape().size() != 2 || x.shape().size() != 2 || a.dim(0) != x.dim(1) ||
      a.dim(1) != params.agg_w.dim(0) || x.dim(0) != params.gate_w1.dim(0)) {
    fail(ErrorKind::ShapeMismatch, "score_bands: A " + shape_string(a.shape()) + ", X " + shape_string(x.shape()) +
                                       " inconsistent with parameters (k_f=" + std::to_string(params.agg_w.dim(0)) +
                                       ", hw=" + std::to_string(params.gate_w1.dim(0)) + ")");
  }
  const std::size_t c = a.dim(0);
  BandScore s;
  s.v = reshape(add_per_col(matmul(a, g.param(params.agg_w)), g.param(params.agg_b)), {c});
  Var hidden = gelu(add_per_col(matmul(transpose(x), g.param(params.gate_w1)), g.param(params.gate_b1)));
  s.g = reshape(sigmoid(add_per_col(matmul(hidden, g.param(params.gate_w2)), g.param(params.gate_b2))), {c});
  s.weighted = mul(s.v, s.g);
  return s;
}

BandSelection select_topk(std::span<const double> weighted, double ratio) {
  BandSelection sel;
  sel.ratio = ratio;
  sel.k = retained_count(ratio, weighted.size());
  std::vector<std::size_t> order(weighted.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sel.k), order.end(),
                    [&](std::size_t i, std::size_t j) {
                      return weighted[i] > weighted[j] || (weighted[i] == weighted[j] && i < j);
                    });
  sel.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sel.k));
  std::sort(sel.indices.begin(), sel.indices.end());
  return sel;
}

Var gather_bands(Var x, const BandSelection& selection) { return gather_columns(x, selection.indices); }

KbsmOutput kbsm_forward(Var x, Var z, KbsmParams& params, double ratio) {
  KbsmOutput out;
  out.score = score_bands(attention_map(x, z), x, params);
  out.selection = select_topk(out.score.weighted.value().data(), ratio);
  out.selected = gather_bands(x, out.selection);
  return out;
}

}  // namespace specband
