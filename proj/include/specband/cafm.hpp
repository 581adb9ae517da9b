#pragma once

#include <cstddef>
#include <string>

#include "specband/autodiff.hpp"
#include "specband/params.hpp"

namespace specband {

/// Two-source fusion block.
///
/// The HSI-side input is a [d x p x p] stack treated as depth for a 3x3x3
/// convolution with `depth_filters` output maps, flattened to (filters * d)
/// channels and projected to `width` by a 1x1 convolution. The auxiliary input
/// [a x p x p] goes through one 3x3 convolution to `width` channels.
struct CafmParams {
  static constexpr std::size_t depth_filters = 2;

  Tensor hsi_k3;    // [m x 1 x 3 x 3 x 3]
  Tensor hsi_proj;  // [width x m*d x 1 x 1]
  Tensor hsi_b;     // [width]
  Tensor aux_k;     // [width x a x 3 x 3]
  Tensor aux_b;     // [width]
  // Source descriptor: GAP(concat) [2w] -> w -> 2w, softmax over the source axis.
  Tensor desc1_w;  // [2w x w]
  Tensor desc1_b;  // [w]
  Tensor desc2_w;  // [w x 2w]
  Tensor desc2_b;  // [2w]
  // Refinement.
  Tensor ctx_k;     // [w x w x 3 x 3]
  Tensor ctx_b;     // [w]
  Tensor local_k;   // [w x w x 3 x 3]
  Tensor local_b;   // [w]
  Tensor global_w;  // [w x w]
  Tensor global_b;  // [w]

  static CafmParams init(std::size_t hsi_depth, std::size_t aux_channels, std::size_t width, Rng& rng);
  void collect(const std::string& prefix, ParamList& out);
  std::size_t width() const { return hsi_b.size(); }
  std::size_t hsi_depth() const { return hsi_proj.dim(1) / depth_filters; }
  std::size_t aux_channels() const { return aux_k.dim(1); }
};

/// Per-channel source weights [width]; w_h + w_x = 1.
struct SourceWeights {
  Var w_h;
  Var w_x;
};

struct WeightingOutput {
  Var fused;  // F_mid [w x p x p]
  SourceWeights weights;
};

struct RefineOutput {
  Var fused;  // F_fus [w x p x p]
  Var mask;   // channel softmax M [w x p x p]
};

/// [d x p x p] -> [w x p x p].
Var project_hsi(Var hsi, CafmParams& params);
/// [a x p x p] -> [w x p x p].
Var project_aux(Var aux, CafmParams& params);

/// Weighting of already projected sources: F_mid = w_h * F_h' + w_x * F_x'.
WeightingOutput weight_sources(Var hsi_projected, Var aux_projected, CafmParams& params);
WeightingOutput cross_source_weighting(Var hsi, Var aux, CafmParams& params);

/// F_ctx = conv(F_mid); M = softmax_channels(conv(F_ctx) * linear(GAP(F_ctx)));
/// F_fus = M * F_mid + F_mid.
RefineOutput local_global_refine(Var mid, CafmParams& params);

Var cafm_forward(Var hsi, Var aux, CafmParams& params);

}  // namespace specband
