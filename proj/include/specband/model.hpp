#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specband/autodiff.hpp"
#include "specband/cafm.hpp"
#include "specband/dataio.hpp"
#include "specband/kbsm.hpp"
#include "specband/params.hpp"

namespace specband {

/// Which inputs reach the network; the others are replaced by zeros.
enum class Sources { Both, HsiOnly, AuxOnly };

std::string to_string(Sources s);
Sources sources_from_string(const std::string& name);

struct ModelConfig {
  std::size_t patch_size = 11;
  double band_ratio = 0.2;
  std::size_t num_blocks = 4;
  std::size_t hsi_bands = 0;      // c
  std::size_t aux_bands = 0;
  std::size_t reduced_bands = 0;  // r, output width of the reduced and aux encoders
  std::size_t width = 16;         // fused channel width c_f
  std::size_t attention_width = 16;
  /// Hidden units per band in the depthwise HSI encoder.
  std::size_t hsi_hidden = 2;
  int num_classes = 2;
  std::uint64_t seed = 0;
  /// When false the reduced-HSI encoder reads the full HSI patch instead of
  /// its PCA projection.
  bool use_pca = true;
  bool share_block_params = false;
  /// Reuse block 1's band selection in later blocks instead of re-selecting.
  bool freeze_selection = false;
  Sources sources = Sources::Both;

  /// Throws InvalidArgument / EvenPatchSize naming the bad field.
  void validate() const;
  std::size_t retained_bands() const;  // k = ceil(band_ratio * c)
  std::size_t reduced_input_bands() const { return use_pca ? reduced_bands : hsi_bands; }
  std::size_t pixels() const { return patch_size * patch_size; }
};

/// Per-band (depthwise) two-stage encoder with m hidden units per band:
/// x_b -> sum_j a2[b,j] * gelu(a1[b,j] * x_b + b1[b,j]) + b2[b].
struct SpectralEncoderParams {
  Tensor a1, b1, a2;  // [c * m], band-major
  Tensor b2;          // [c]
};

/// Two 3x3 same-padded convolutions with GELU.
struct ConvEncoderParams {
  Tensor k1, b1;  // [width x in x 3 x 3], [width]
  Tensor k2, b2;  // [out x width x 3 x 3], [out]
};

/// Token-wise two-layer MLP with a residual connection.
struct FfnParams {
  Tensor w1, b1;  // [c_f x 2c_f], [2c_f]
  Tensor w2, b2;  // [2c_f x c_f], [c_f]
};

struct BlockParams {
  KbsmParams kbsm;
  FfnParams ffn;
  CafmParams cafm;
};

struct HeadParams {
  Tensor wq;      // [c_f x d]
  Tensor wk, wv;  // [k x d]
  Tensor m1_w, m1_b;  // [d x 2d], [2d]
  Tensor m2_w, m2_b;  // [2d x C], [C]
};

struct ModelParams {
  ModelConfig config;
  SpectralEncoderParams hsi;
  ConvEncoderParams reduced;
  ConvEncoderParams aux;
  CafmParams fusion;
  std::vector<BlockParams> blocks;  // one entry when parameters are shared
  HeadParams head;

  static ModelParams init(const ModelConfig& config);
  /// Every trainable tensor, in a fixed order.
  ParamList list();
  BlockParams& block(std::size_t index) { return blocks[std::min(index, blocks.size() - 1)]; }
};

std::size_t count_params(ModelParams& params);

enum class Stream { Hsi, Reduced, Aux };

/// Feature matrix [hw x c] for Hsi, [hw x r] for Reduced and Aux, from a
/// channel-major patch.
Var encode(Graph& g, std::span<const double> patch, Stream which, ModelParams& params);

/// Fused map -> token matrix [hw x c_f] and back.
Var to_tokens(Var map);
Var to_map(Var tokens, std::size_t patch_size);

Var ffn_forward(Var tokens, FfnParams& params);

struct RscbOutput {
  Var fused;     // [c_f x p x p]
  Var selected;  // F_h' = gathered band columns [hw x k]
  KbsmOutput kbsm;
};

/// One refinement block: the selected band columns and FFN(F_fus_in) are
/// fused by the block's CAFM. `frozen`, when given, replaces
/// the block's own selection.
RscbOutput rscb_forward(Var f_h, Var f_fus, BlockParams& params, double ratio, const BandSelection* frozen = nullptr);

/// Single-head scaled dot-product attention (queries from fused tokens,
/// keys/values from the selected bands), residual, mean over positions, MLP.
Var head_forward(Var fused_tokens, Var selected, HeadParams& params);

struct ForwardResult {
  Var logits;  // [1 x C]
  std::vector<BandSelection> selections;  // per block
};

ForwardResult forward(Graph& g, const Patch& patch, ModelParams& params);

/// Logits [n x C] for the given patches (all when indices is empty), computed
/// on up to `threads` workers over disjoint patches.
Tensor predict_logits(ModelParams& params, const PatchSet& patches, std::span<const std::size_t> indices = {},
                      unsigned threads = 1);

/// Dataset-level band choice: how often each band is picked by the given
/// block's selection over the patches; the k most frequent win (ties toward
/// the lower index).
struct DatasetSelection {
  std::size_t k = 0;
  std::vector<std::size_t> indices;  // ascending
  std::vector<double> frequency;     // per band, in [0, 1]
};

DatasetSelection select_bands(ModelParams& params, const PatchSet& patches, std::span<const std::size_t> indices = {},
                              std::size_t block = 0, unsigned threads = 1);

/// Manifest `<base>.json` (config, tensor names, shapes, offsets, extra JSON)
/// plus one little-endian fp64 payload `<base>.raw` holding every tensor in
/// list() order. `extra_tensors` are stored after the parameters.
struct NamedTensor {
  std::string name;
  Tensor value;
};

void save_checkpoint(ModelParams& params, const std::filesystem::path& base, const std::string& extra_json = "{}",
                     const std::vector<NamedTensor>& extra_tensors = {});

struct LoadedCheckpoint {
  ModelParams params;
  std::string extra_json;
  std::vector<NamedTensor> extra_tensors;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& base);

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

}  // namespace specband
