#include "specband/model.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "specband/error.hpp"
#include "specband/ops.hpp"
#include "specband/parallel.hpp"

namespace specband {
namespace {

using json = nlohmann::ordered_json;

double fan_in_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

ConvEncoderParams init_conv_encoder(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  ConvEncoderParams p;
  p.k1 = uniform_param({hidden, in, 3, 3}, fan_in_bound(9 * in), rng);
  p.b1 = constant_param({hidden}, 0.0);
  p.k2 = uniform_param({out, hidden, 3, 3}, fan_in_bound(9 * hidden), rng);
  p.b2 = constant_param({out}, 0.0);
  return p;
}

FfnParams init_ffn(std::size_t width, Rng& rng) {
  FfnParams p;
  p.w1 = uniform_param({width, 2 * width}, fan_in_bound(width), rng);
  p.b1 = constant_param({2 * width}, 0.0);
  p.w2 = uniform_param({2 * width, width}, fan_in_bound(2 * width), rng);
  p.b2 = constant_param({width}, 0.0);
  return p;
}

void collect_conv(const std::string& prefix, ConvEncoderParams& p, ParamList& out) {
  out.emplace_back(prefix + "k1", &p.k1);
  out.emplace_back(prefix + "b1", &p.b1);
  out.emplace_back(prefix + "k2", &p.k2);
  out.emplace_back(prefix + "b2", &p.b2);
}

// Token-matrix linear layer: x [n x a] * w [a x b] + b.
Var dense(Var x, Var w, Var b) { return add_per_col(matmul(x, w), b); }

Var conv_encoder(Var x, ConvEncoderParams& p) {
  Graph& g = x.graph();
  Var h = gelu(add_per_row(conv2d(x, g.param(p.k1), Padding::Same), g.param(p.b1)));
  return gelu(add_per_row(conv2d(h, g.param(p.k2), Padding::Same), g.param(p.b2)));
}

Var patch_constant(Graph& g, std::span<const double> values, std::size_t channels, std::size_t p, bool zeroed,
                   const char* what) {
  if (values.size() != channels * p * p) {
    fail(ErrorKind::ShapeMismatch, std::string(what) + " patch holds " + std::to_string(values.size()) +
                                       " values, expected " + std::to_string(channels) + "x" + std::to_string(p) +
                                       "x" + std::to_string(p));
  }
  if (zeroed) return g.constant(Tensor({channels, p, p}));
  return g.constant(Tensor({channels, p, p}, std::vector<double>(values.begin(), values.end())));
}

// Map [C x p x p] for the conv streams; the HSI stream is handled separately.
Var encode_map(Var x, Stream which, ModelParams& params) {
  return conv_encoder(x, which == Stream::Aux ? params.aux : params.reduced);
}

// [c x c*m] with ones where column j belongs to band j / m.
Tensor group_sum_matrix(std::size_t c, std::size_t m) {
  Tensor s({c, c * m});
  for (std::size_t j = 0; j < c * m; ++j) s.at(j / m, j) = 1.0;
  return s;
}

Var encode_hsi(Var x, ModelParams& params) {
  Graph& g = x.graph();
  const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2);
  SpectralEncoderParams& p = params.hsi;
  const std::size_t m = params.config.hsi_hidden;
  Var flat = reshape(x, {c, hw});
  if (m > 1) {
    // Repeat each band row m times: [c*m x hw].
    std::vector<std::size_t> rep(c * m);
    for (std::size_t i = 0; i < rep.size(); ++i) rep[i] = i / m;
    flat = transpose(gather_columns(transpose(flat), rep));
  }
  Var h = mul_per_row(gelu(add_per_row(mul_per_row(flat, g.param(p.a1)), g.param(p.b1))), g.param(p.a2));
  if (m > 1) h = matmul(g.constant(group_sum_matrix(c, m)), h);
  return transpose(add_per_row(h, g.param(p.b2)));
}

std::vector<std::size_t> all_indices(const PatchSet& patches, std::span<const std::size_t> indices) {
  if (!indices.empty()) return {indices.begin(), indices.end()};
  std::vector<std::size_t> out(patches.size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace

std::string to_string(Sources s) {
  switch (s) {
    case Sources::Both: return "both";
    case Sources::HsiOnly: return "hsi";
    case Sources::AuxOnly: return "aux";
  }
  return "both";
}

Sources sources_from_string(const std::string& name) {
  if (name == "both") return Sources::Both;
  if (name == "hsi") return Sources::HsiOnly;
  if (name == "aux") return Sources::AuxOnly;
  fail(ErrorKind::InvalidArgument, "unknown source selection '" + name + "' (both|hsi|aux)");
}

void ModelConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::InvalidArgument, what); };
  if (patch_size == 0 || patch_size % 2 == 0) {
    fail(ErrorKind::EvenPatchSize, "patch size must be odd, got " + std::to_string(patch_size));
  }
  if (!(band_ratio > 0.0 && band_ratio <= 1.0)) bad("band ratio must lie in (0, 1], got " + std::to_string(band_ratio));
  if (num_blocks < 1) bad("at least one block is required");
  if (num_classes < 2) bad("at least two classes are required, got " + std::to_string(num_classes));
  if (hsi_bands == 0 || aux_bands == 0) bad("HSI and auxiliary band counts must be positive");
  if (reduced_bands == 0) bad("reduced band count must be positive");
  if (use_pca && reduced_bands > hsi_bands) {
    bad("reduced bands " + std::to_string(reduced_bands) + " exceed HSI bands " + std::to_string(hsi_bands));
  }
  if (width == 0 || attention_width == 0 || hsi_hidden == 0) bad("layer widths must be positive");
}

std::size_t ModelConfig::retained_bands() const { return retained_count(band_ratio, hsi_bands); }

ModelParams ModelParams::init(const ModelConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t c = config.hsi_bands, r = config.reduced_bands, w = config.width;
  const std::size_t k = config.retained_bands(), d = config.attention_width;
  ModelParams m;
  m.config = config;

  const std::size_t hidden = config.hsi_hidden;
  m.hsi.a1 = Tensor({c * hidden});
  m.hsi.b1 = Tensor({c * hidden});
  m.hsi.a2 = Tensor({c * hidden});
  m.hsi.b2 = Tensor({c});
  // Units come in pairs with mirrored slopes and output weights, so the
  // encoder starts as the odd map x -> a * x (gelu(z) - gelu(-z) = z).
  const double out_scale = 1.0 / static_cast<double>(hidden);
  for (std::size_t b = 0; b < c; ++b) {
    for (std::size_t j = 0; j < hidden; ++j) {
      const std::size_t i = b * hidden + j;
      if (j % 2 == 1) {
        m.hsi.a1[i] = -m.hsi.a1[i - 1];
        m.hsi.b1[i] = 0.0;
        m.hsi.a2[i] = -m.hsi.a2[i - 1];
        continue;
      }
      m.hsi.a1[i] = rng.uniform(0.5, 1.5);
      m.hsi.a2[i] = out_scale * rng.uniform(0.5, 1.5);
    }
  }
  for (Tensor* t : {&m.hsi.a1, &m.hsi.b1, &m.hsi.a2, &m.hsi.b2}) t->set_requires_grad(true);

  m.reduced = init_conv_encoder(config.reduced_input_bands(), w, r, rng);
  m.aux = init_conv_encoder(config.aux_bands, w, r, rng);
  m.fusion = CafmParams::init(r, r, w, rng);

  const std::size_t distinct = config.share_block_params ? 1 : config.num_blocks;
  for (std::size_t i = 0; i < distinct; ++i) {
    BlockParams b;
    b.kbsm = KbsmParams::init(config.pixels(), w, rng);
    b.ffn = init_ffn(w, rng);
    b.cafm = CafmParams::init(k, w, w, rng);
    m.blocks.push_back(std::move(b));
  }

  m.head.wq = uniform_param({w, d}, fan_in_bound(w), rng);
  m.head.wk = uniform_param({k, d}, fan_in_bound(k), rng);
  m.head.wv = uniform_param({k, d}, fan_in_bound(k), rng);
  m.head.m1_w = uniform_param({d, 2 * d}, fan_in_bound(d), rng);
  m.head.m1_b = constant_param({2 * d}, 0.0);
  m.head.m2_w = uniform_param({2 * d, static_cast<std::size_t>(config.num_classes)}, fan_in_bound(2 * d), rng);
  m.head.m2_b = constant_param({static_cast<std::size_t>(config.num_classes)}, 0.0);
  return m;
}

ParamList ModelParams::list() {
  ParamList out;
  out.emplace_back("hsi.a1", &hsi.a1);
  out.emplace_back("hsi.b1", &hsi.b1);
  out.emplace_back("hsi.a2", &hsi.a2);
  out.emplace_back("hsi.b2", &hsi.b2);
  collect_conv("reduced.", reduced, out);
  collect_conv("aux.", aux, out);
  fusion.collect("fusion.", out);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string prefix = "block" + std::to_string(i) + ".";
    blocks[i].kbsm.collect(prefix + "kbsm.", out);
    out.emplace_back(prefix + "ffn.w1", &blocks[i].ffn.w1);
    out.emplace_back(prefix + "ffn.b1", &blocks[i].ffn.b1);
    out.emplace_back(prefix + "ffn.w2", &blocks[i].ffn.w2);
    out.emplace_back(prefix + "ffn.b2", &blocks[i].ffn.b2);
    blocks[i].cafm.collect(prefix + "cafm.", out);
  }
  out.emplace_back("head.wq", &head.wq);
  out.emplace_back("head.wk", &head.wk);
  out.emplace_back("head.wv", &head.wv);
  out.emplace_back("head.m1_w", &head.m1_w);
  out.emplace_back("head.m1_b", &head.m1_b);
  out.emplace_back("head.m2_w", &head.m2_w);
  out.emplace_back("head.m2_b", &head.m2_b);
  return out;
}

std::size_t count_params(ModelParams& params) { return count_scalars(params.list()); }

Var encode(Graph& g, std::span<const double> patch, Stream which, ModelParams& params) {
  const ModelConfig& cfg = params.config;
  const std::size_t p = cfg.patch_size;
  switch (which) {
    case Stream::Hsi:
      return encode_hsi(patch_constant(g, patch, cfg.hsi_bands, p, false, "HSI"), params);
    case Stream::Reduced:
      return to_tokens(encode_map(patch_constant(g, patch, cfg.reduced_input_bands(), p, false, "reduced"), which, params));
    case Stream::Aux:
      return to_tokens(encode_map(patch_constant(g, patch, cfg.aux_bands, p, false, "auxiliary"), which, params));
  }
  fail(ErrorKind::InvalidArgument, "unknown stream");
}

Var to_tokens(Var map) {
  if (map.shape().size() != 3) fail(ErrorKind::ShapeMismatch, "to_tokens expects [C x p x p]");
  return transpose(reshape(map, {map.dim(0), map.dim(1) * map.dim(2)}));
}

Var to_map(Var tokens, std::size_t patch_size) {
  if (tokens.shape().size() != 2 || tokens.dim(0) != patch_size * patch_size) {
    fail(ErrorKind::ShapeMismatch, "to_map: tokens " + shape_string(tokens.shape()) + " for patch " +
                                       std::to_string(patch_size));
  }
  return reshape(transpose(tokens), {tokens.dim(1), patch_size, patch_size});
}

Var ffn_forward(Var tokens, FfnParams& p) {
  Graph& g = tokens.graph();
  Var h = gelu(dense(tokens, g.param(p.w1), g.param(p.b1)));
  return add(tokens, dense(h, g.param(p.w2), g.param(p.b2)));
}

RscbOutput rscb_forward(Var f_h, Var f_fus, BlockParams& params, double ratio, const BandSelection* frozen) {
  if (f_fus.shape().size() != 3 || f_fus.dim(1) != f_fus.dim(2)) {
    fail(ErrorKind::ShapeMismatch, "fused features must be [c_f x p x p], got " + shape_string(f_fus.shape()));
  }
  const std::size_t p = f_fus.dim(1);
  Var tokens = to_tokens(f_fus);
  RscbOutput out;
  out.kbsm = kbsm_forward(f_h, tokens, params.kbsm, ratio);
  if (frozen != nullptr) {
    out.kbsm.selection = *frozen;
    out.kbsm.selected = gather_bands(f_h, *frozen);
  }
  // Selection indices are constants of the pass: gradient reaches X through
  // the gathered columns only.
  out.selected = out.kbsm.selected;
  Var hsi_in = to_map(out.selected, p);
  Var aux_in = to_map(ffn_forward(tokens, params.ffn), p);
  out.fused = cafm_forward(hsi_in, aux_in, params.cafm);
  return out;
}

Var head_forward(Var fused_tokens, Var selected, HeadParams& p) {
  Graph& g = fused_tokens.graph();
  const double d = static_cast<double>(p.wq.dim(1));
  Var q = matmul(fused_tokens, g.param(p.wq));
  Var k = matmul(selected, g.param(p.wk));
  Var v = matmul(selected, g.param(p.wv));
  Var attn = softmax(scale(matmul(q, transpose(k)), 1.0 / std::sqrt(d)), 1);
  Var mixed = add(q, matmul(attn, v));
  Var pooled = reshape(global_avg_pool(transpose(mixed)), {1, mixed.dim(1)});
  Var hidden = gelu(dense(pooled, g.param(p.m1_w), g.param(p.m1_b)));
  return dense(hidden, g.param(p.m2_w), g.param(p.m2_b));
}

ForwardResult forward(Graph& g, const Patch& patch, ModelParams& params) {
  const ModelConfig& cfg = params.config;
  const std::size_t p = cfg.patch_size;
  const bool drop_hsi = cfg.sources == Sources::AuxOnly;
  const bool drop_aux = cfg.sources == Sources::HsiOnly;

  Var hsi = patch_constant(g, patch.hsi, cfg.hsi_bands, p, drop_hsi, "HSI");
  const std::vector<double>& reduced_src = cfg.use_pca ? patch.reduced : patch.hsi;
  Var reduced = patch_constant(g, reduced_src, cfg.reduced_input_bands(), p, drop_hsi, "reduced");
  Var aux = patch_constant(g, patch.aux, cfg.aux_bands, p, drop_aux, "auxiliary");

  Var f_h = encode_hsi(hsi, params);
  Var f_fus = cafm_forward(encode_map(reduced, Stream::Reduced, params), encode_map(aux, Stream::Aux, params),
                           params.fusion);

  ForwardResult result;
  Var selected;
  for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
    const BandSelection* frozen = (cfg.freeze_selection && b > 0) ? &result.selections.front() : nullptr;
    RscbOutput out = rscb_forward(f_h, f_fus, params.block(b), cfg.band_ratio, frozen);
    f_fus = out.fused;
    selected = out.selected;
    result.selections.push_back(std::move(out.kbsm.selection));
  }
  result.logits = head_forward(to_tokens(f_fus), selected, params.head);
  return result;
}

Tensor predict_logits(ModelParams& params, const PatchSet& patches, std::span<const std::size_t> indices,
                      unsigned threads) {
  const auto order = all_indices(patches, indices);
  const auto classes = static_cast<std::size_t>(params.config.num_classes);
  Tensor out({order.size(), classes});
  parallel_for(order.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (order[i] >= patches.size()) fail(ErrorKind::IndexOutOfRange, "patch index " + std::to_string(order[i]));
      Graph g;
      const Tensor& logits = forward(g, patches.patches[order[i]], params).logits.value();
      std::copy(logits.storage().begin(), logits.storage().end(), out.storage().begin() + i * classes);
    }
  });
  return out;
}

DatasetSelection select_bands(ModelParams& params, const PatchSet& patches, std::span<const std::size_t> indices,
                              std::size_t block, unsigned threads) {
  if (block >= params.config.num_blocks) {
    fail(ErrorKind::InvalidArgument, "block " + std::to_string(block) + " out of range");
  }
  const auto order = all_indices(patches, indices);
  if (order.empty()) fail(ErrorKind::EmptyTestSet, "no patches to select bands on");
  const std::size_t c = params.config.hsi_bands;
  std::vector<std::vector<std::size_t>> picks(order.size());
  parallel_for(order.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Graph g;
      picks[i] = forward(g, patches.patches.at(order[i]), params).selections[block].indices;
    }
  });
  DatasetSelection sel;
  sel.k = params.config.retained_bands();
  sel.frequency.assign(c, 0.0);
  for (const auto& chosen : picks)
    for (std::size_t b : chosen) sel.frequency[b] += 1.0;
  for (double& f : sel.frequency) f /= static_cast<double>(order.size());
  sel.indices = select_topk(sel.frequency, static_cast<double>(sel.k) / static_cast<double>(c)).indices;
  if (sel.indices.size() != sel.k) sel.indices.resize(sel.k);
  return sel;
}

std::string config_to_json(const ModelConfig& c) {
  json j;
  j["patch_size"] = c.patch_size;
  j["band_ratio"] = c.band_ratio;
  j["num_blocks"] = c.num_blocks;
  j["hsi_bands"] = c.hsi_bands;
  j["aux_bands"] = c.aux_bands;
  j["reduced_bands"] = c.reduced_bands;
  j["width"] = c.width;
  j["attention_width"] = c.attention_width;
  j["hsi_hidden"] = c.hsi_hidden;
  j["num_classes"] = c.num_classes;
  j["seed"] = c.seed;
  j["use_pca"] = c.use_pca;
  j["share_block_params"] = c.share_block_params;
  j["freeze_selection"] = c.freeze_selection;
  j["sources"] = to_string(c.sources);
  return j.dump();
}

ModelConfig config_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ModelConfig c;
    c.patch_size = j.at("patch_size").get<std::size_t>();
    c.band_ratio = j.at("band_ratio").get<double>();
    c.num_blocks = j.at("num_blocks").get<std::size_t>();
    c.hsi_bands = j.at("hsi_bands").get<std::size_t>();
    c.aux_bands = j.at("aux_bands").get<std::size_t>();
    c.reduced_bands = j.at("reduced_bands").get<std::size_t>();
    c.width = j.at("width").get<std::size_t>();
    c.attention_width = j.at("attention_width").get<std::size_t>();
    c.hsi_hidden = j.at("hsi_hidden").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.use_pca = j.at("use_pca").get<bool>();
    c.share_block_params = j.at("share_block_params").get<bool>();
    c.freeze_selection = j.at("freeze_selection").get<bool>();
    c.sources = sources_from_string(j.at("sources").get<std::string>());
    c.validate();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorKind::HeaderMismatch, std::string("model config: ") + e.what());
  }
}

void save_checkpoint(ModelParams& params, const std::filesystem::path& base, const std::string& extra_json,
                     const std::vector<NamedTensor>& extra_tensors) {
  json manifest;
  manifest["format"] = "specband-checkpoint";
  manifest["version"] = 1;
  manifest["config"] = json::parse(config_to_json(params.config));
  manifest["seed"] = params.config.seed;
  std::vector<double> payload;
  auto add_entry = [&](const std::string& name, const Tensor& t, const char* group) {
    json e;
    e["name"] = name;
    e["group"] = group;
    e["shape"] = t.shape();
    e["offset"] = payload.size();
    manifest["tensors"].push_back(e);
    payload.insert(payload.end(), t.storage().begin(), t.storage().end());
  };
  for (auto& [name, tensor] : params.list()) add_entry(name, *tensor, "param");
  for (const auto& t : extra_tensors) add_entry(t.name, t.value, "extra");
  manifest["parameter_count"] = count_params(params);
  manifest["extra"] = json::parse(extra_json.empty() ? "{}" : extra_json);
  write_raster_f64(payload, 1, payload.size(), manifest.dump(), base);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& base) {
  RasterHeader header;
  std::string header_text;
  const std::vector<double> payload = read_raster_f64(base, &header, &header_text);
  const json manifest = json::parse(header_text);
  if (manifest.value("format", std::string()) != "specband-checkpoint") {
    fail(ErrorKind::HeaderMismatch, "not a checkpoint: " + base.string());
  }
  LoadedCheckpoint out;
  out.params = ModelParams::init(config_from_json(manifest.at("config").dump()));
  out.extra_json = manifest.contains("extra") ? manifest["extra"].dump() : "{}";
  ParamList list = out.params.list();
  std::size_t next_param = 0;
  for (const auto& e : manifest.at("tensors")) {
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<Shape>();
    const auto offset = e.at("offset").get<std::size_t>();
    const std::size_t count = shape_size(shape);
    if (offset + count > payload.size()) fail(ErrorKind::TruncatedPayload, "tensor " + name + " beyond payload");
    std::vector<double> values(payload.begin() + static_cast<std::ptrdiff_t>(offset),
                               payload.begin() + static_cast<std::ptrdiff_t>(offset + count));
    if (e.value("group", std::string("param")) == "param") {
      if (next_param >= list.size() || list[next_param].first != name || list[next_param].second->shape() != shape) {
        fail(ErrorKind::HeaderMismatch, "checkpoint tensor " + name + " does not match the model layout");
      }
      Tensor& t = *list[next_param].second;
      std::copy(values.begin(), values.end(), t.storage().begin());
      ++next_param;
    } else {
      out.extra_tensors.push_back({name, Tensor(shape, std::move(values))});
    }
  }
  if (next_param != list.size()) fail(ErrorKind::HeaderMismatch, "checkpoint is missing parameters");
  return out;
}

}  // namespace specband
