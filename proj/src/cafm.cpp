#include "specband/cafm.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "specband/error.hpp"
#include "specband/ops.hpp"

namespace specband {
namespace {

double fan_in_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

// Linear layer on a rank-1 input: x [n] -> [m].
Var linear(Var x, Var w, Var b) {
  return reshape(add_per_col(matmul(reshape(x, {1, x.size()}), w), b), {w.dim(1)});
}

std::vector<std::size_t> range(std::size_t from, std::size_t to) {
  std::vector<std::size_t> out(to - from);
  std::iota(out.begin(), out.end(), from);
  return out;
}

}  // namespace

CafmParams CafmParams::init(std::size_t hsi_depth, std::size_t aux_channels, std::size_t width, Rng& rng) {
  const std::size_t m = depth_filters, w = width;
  CafmParams p;
  p.hsi_k3 = uniform_param({m, 1, 3, 3, 3}, fan_in_bound(27), rng);
  p.hsi_proj = uniform_param({w, m * hsi_depth, 1, 1}, fan_in_bound(m * hsi_depth), rng);
  p.hsi_b = constant_param({w}, 0.0);
  p.aux_k = uniform_param({w, aux_channels, 3, 3}, fan_in_bound(9 * aux_channels), rng);
  p.aux_b = constant_param({w}, 0.0);
  p.desc1_w = uniform_param({2 * w, w}, fan_in_bound(2 * w), rng);
  p.desc1_b = constant_param({w}, 0.0);
  p.desc2_w = uniform_param({w, 2 * w}, fan_in_bound(w), rng);
  p.desc2_b = constant_param({2 * w}, 0.0);
  p.ctx_k = uniform_param({w, w, 3, 3}, fan_in_bound(9 * w), rng);
  p.ctx_b = constant_param({w}, 0.0);
  p.local_k = uniform_param({w, w, 3, 3}, fan_in_bound(9 * w), rng);
  p.local_b = constant_param({w}, 0.0);
  p.global_w = uniform_param({w, w}, fan_in_bound(w), rng);
  p.global_b = constant_param({w}, 0.0);
  return p;
}

void CafmParams::collect(const std::string& prefix, ParamList& out) {
  out.emplace_back(prefix + "hsi_k3", &hsi_k3);
  out.emplace_back(prefix + "hsi_proj", &hsi_proj);
  out.emplace_back(prefix + "hsi_b", &hsi_b);
  out.emplace_back(prefix + "aux_k", &aux_k);
  out.emplace_back(prefix + "aux_b", &aux_b);
  out.emplace_back(prefix + "desc1_w", &desc1_w);
  out.emplace_back(prefix + "desc1_b", &desc1_b);
  out.emplace_back(prefix + "desc2_w", &desc2_w);
  out.emplace_back(prefix + "desc2_b", &desc2_b);
  out.emplace_back(prefix + "ctx_k", &ctx_k);
  out.emplace_back(prefix + "ctx_b", &ctx_b);
  out.emplace_back(prefix + "local_k", &local_k);
  out.emplace_back(prefix + "local_b", &local_b);
  out.emplace_back(prefix + "global_w", &global_w);
  out.emplace_back(prefix + "global_b", &global_b);
}

Var project_hsi(Var hsi, CafmParams& params) {
  if (hsi.shape().size() != 3 || hsi.dim(0) != params.hsi_depth()) {
    fail(ErrorKind::ShapeMismatch, "CAFM HSI input " + shape_string(hsi.shape()) + ", expected depth " +
                                       std::to_string(params.hsi_depth()));
  }
  Graph& g = hsi.graph();
  const std::size_t d = hsi.dim(0), h = hsi.dim(1), w = hsi.dim(2);
  Var volume = conv3d(reshape(hsi, {1, d, h, w}), g.param(params.hsi_k3), Padding::Same);
  Var flat = reshape(volume, {CafmParams::depth_filters * d, h, w});
  return add_per_row(conv2d(flat, g.param(params.hsi_proj), Padding::Same), g.param(params.hsi_b));
}

Var project_aux(Var aux, CafmParams& params) {
  if (aux.shape().size() != 3 || aux.dim(0) != params.aux_channels()) {
    fail(ErrorKind::ShapeMismatch, "CAFM auxiliary input " + shape_string(aux.shape()) + ", expected " +
                                       std::to_string(params.aux_channels()) + " channels");
  }
  Graph& g = aux.graph();
  return add_per_row(conv2d(aux, g.param(params.aux_k), Padding::Same), g.param(params.aux_b));
}

WeightingOutput weight_sources(Var hsi_projected, Var aux_projected, CafmParams& params) {
  const std::size_t w = params.width();
  if (hsi_projected.shape() != aux_projected.shape() || hsi_projected.dim(0) != w) {
    fail(ErrorKind::ShapeMismatch, "projected sources " + shape_string(hsi_projected.shape()) + " and " +
                                       shape_string(aux_projected.shape()) + " differ or mismatch width " +
                                       std::to_string(w));
  }
  Graph& g = hsi_projected.graph();
  const Var parts[] = {hsi_projected, aux_projected};
  Var descriptor = global_avg_pool(concat(parts));
  Var hidden = gelu(linear(descriptor, g.param(params.desc1_w), g.param(params.desc1_b)));
  Var logits = reshape(linear(hidden, g.param(params.desc2_w), g.param(params.desc2_b)), {2, w});
  Var weights = reshape(softmax(logits, 0), {2 * w});

  WeightingOutput out;
  out.weights.w_h = gather(weights, range(0, w));
  out.weights.w_x = gather(weights, range(w, 2 * w));
  out.fused = add(mul_per_row(hsi_projected, out.weights.w_h), mul_per_row(aux_projected, out.weights.w_x));
  return out;
}

WeightingOutput cross_source_weighting(Var hsi, Var aux, CafmParams& params) {
  return weight_sources(project_hsi(hsi, params), project_aux(aux, params), params);
}

RefineOutput local_global_refine(Var mid, CafmParams& params) {
  if (mid.shape().size() != 3 || mid.dim(0) != params.width()) {
    fail(ErrorKind::ShapeMismatch, "refinement input " + shape_string(mid.shape()) + ", expected " +
                                       std::to_string(params.width()) + " channels");
  }
  Graph& g = mid.graph();
  Var ctx = add_per_row(conv2d(mid, g.param(params.ctx_k), Padding::Same), g.param(params.ctx_b));
  Var local = add_per_row(conv2d(ctx, g.param(params.local_k), Padding::Same), g.param(params.local_b));
  Var global = linear(global_avg_pool(ctx), g.param(params.global_w), g.param(params.global_b));
  RefineOutput out;
  out.mask = softmax(mul_per_row(local, global), 0);
  out.fused = add(mul(out.mask, mid), mid);
  return out;
}

Var cafm_forward(Var hsi, Var aux, CafmParams& params) {
  return local_global_refine(cross_source_weighting(hsi, aux, params).fused, params).fused;
}

}  // namespace specband
