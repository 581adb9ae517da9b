#include "specband/pipeline.hpp"


#include "specband/error.hpp"

namespace specband {
namespace {

Tensor vector_tensor(const std::vector<double>& v) {
  Tensor t({v.size()});
  t.storage() = v;
  return t;
}

const Tensor& find(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  fail(ErrorKind::HeaderMismatch, "checkpoint lacks preprocessing tensor '" + name + "'");
}

}  // namespace

PatchSet label_sites(const LabelRaster& labels) {
  PatchSet set;
  set.num_classes = labels.num_classes();
  for (std::size_t r = 0; r < labels.height; ++r) {
    for (std::size_t c = 0; c < labels.width; ++c) {
      if (labels.at(r, c) <= 0) continue;
      Patch p;
      p.label = labels.at(r, c);
      p.row = r;
      p.col = c;
      set.patches.push_back(std::move(p));
    }
  }
  return set;
}

std::vector<std::size_t> site_pixels(const PatchSet& sites, std::span<const std::size_t> indices, std::size_t width) {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= sites.size()) fail(ErrorKind::IndexOutOfRange, "site index " + std::to_string(i));
    out.push_back(sites.patches[i].row * width + sites.patches[i].col);
  }
  return out;
}

Preprocessing fit_preprocessing(const HyperCube& hsi, const HyperCube& aux, const LabelRaster& labels,
                                std::span<const std::size_t> fit_pixels, std::size_t reduced_bands) {
  if (fit_pixels.empty()) fail(ErrorKind::InsufficientSamples, "PCA needs at least one fit pixel");
  for (std::size_t i : fit_pixels) {
    if (i >= hsi.pixels()) fail(ErrorKind::IndexOutOfRange, "fit pixel " + std::to_string(i));
  }
  Preprocessing prep;
  prep.hsi_stats = fit_band_stats(hsi, &labels);
  prep.aux_stats = fit_band_stats(aux, &labels);
  const HyperCube norm = apply_band_stats(hsi, prep.hsi_stats);
  const std::vector<double> pixels = pixel_matrix(norm, fit_pixels);
  prep.pca = pca_fit(pixels, fit_pixels.size(), norm.bands, std::min(reduced_bands, norm.bands));
  return prep;
}

PatchSet prepare_patches(const Preprocessing& prep, const HyperCube& hsi, const HyperCube& aux,
                         const LabelRaster& labels, std::size_t patch_size) {
  if (prep.hsi_stats.mean.size() != hsi.bands || prep.aux_stats.mean.size() != aux.bands) {
    fail(ErrorKind::ShapeMismatch, "preprocessing was fitted for " + std::to_string(prep.hsi_stats.mean.size()) +
                                       "+" + std::to_string(prep.aux_stats.mean.size()) + " bands, input has " +
                                       std::to_string(hsi.bands) + "+" + std::to_string(aux.bands));
  }
  const HyperCube h = apply_band_stats(hsi, prep.hsi_stats);
  const HyperCube a = apply_band_stats(aux, prep.aux_stats);
  const HyperCube reduced = pca_apply(prep.pca, h);
  PatchSet set = extract_patches(h, a, labels, patch_size);
  set.reduced_bands = reduced.bands;
  for (Patch& p : set.patches) p.reduced = extract_window(reduced, p.row, p.col, patch_size);
  return set;
}

PreparedScene prepare_scene(const HyperCube& hsi, const HyperCube& aux, const LabelRaster& labels,
                            std::size_t per_class_train, std::uint64_t split_seed, std::size_t reduced_bands,
                            std::size_t patch_size) {
  PreparedScene out;
  const PatchSet sites = label_sites(labels);
  out.split = split(sites, per_class_train, split_seed);
  const std::vector<std::size_t> fit = site_pixels(sites, out.split.train, labels.width);
  out.prep = fit_preprocessing(hsi, aux, labels, fit, reduced_bands);
  out.patches = prepare_patches(out.prep, hsi, aux, labels, patch_size);
  return out;
}

LabeledPixels labeled_pixels(const Preprocessing& prep, const HyperCube& hsi, const LabelRaster& labels) {
  const HyperCube h = apply_band_stats(hsi, prep.hsi_stats);
  std::vector<std::size_t> idx;
  LabeledPixels out;
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    if (labels.labels[i] > 0) {
      idx.push_back(i);
      out.labels.push_back(labels.labels[i]);
    }
  }
  out.n = idx.size();
  out.bands = h.bands;
  out.features = pixel_matrix(h, idx);
  return out;
}

std::vector<NamedTensor> preprocessing_tensors(const Preprocessing& prep) {
  Tensor components({prep.pca.rank, prep.pca.bands});
  components.storage() = prep.pca.components;
  return {
      {"prep.hsi_mean", vector_tensor(prep.hsi_stats.mean)},
      {"prep.hsi_inv_std", vector_tensor(prep.hsi_stats.inv_std)},
      {"prep.aux_mean", vector_tensor(prep.aux_stats.mean)},
      {"prep.aux_inv_std", vector_tensor(prep.aux_stats.inv_std)},
      {"prep.pca_mean", vector_tensor(prep.pca.mean)},
      {"prep.pca_components", std::move(components)},
      {"prep.pca_variance", vector_tensor(prep.pca.explained_variance)},
  };
}

Preprocessing preprocessing_from_tensors(const std::vector<NamedTensor>& tensors) {
  Preprocessing prep;
  prep.hsi_stats.mean = find(tensors, "prep.hsi_mean").storage();
  prep.hsi_stats.inv_std = find(tensors, "prep.hsi_inv_std").storage();
  prep.aux_stats.mean = find(tensors, "prep.aux_mean").storage();
  prep.aux_stats.inv_std = find(tensors, "prep.aux_inv_std").storage();
  const Tensor& comp = find(tensors, "prep.pca_components");
  prep.pca.rank = comp.dim(0);
  prep.pca.bands = comp.dim(1);
  prep.pca.components = comp.storage();
  prep.pca.mean = find(tensors, "prep.pca_mean").storage();
  prep.pca.explained_variance = find(tensors, "prep.pca_variance").storage();
  return prep;
}

}  // namespace specband
