#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specband/dataio.hpp"
#include "specband/model.hpp"
#include "specband/preprocess.hpp"

namespace specband {

/// Fitted input transforms: per-band standardisation of both sources and the
/// PCA model that produces the reduced stream from the standardised HSI.
struct Preprocessing {
  BandStats hsi_stats;
  BandStats aux_stats;
  PcaModel pca;
};

/// Label, row and column of every labeled pixel, in the order of
/// extract_patches but without any pixel data. Enough to compute a split
/// before the preprocessing is fitted.
PatchSet label_sites(const LabelRaster& labels);

/// Flat pixel indices (row * width + col) of the given sites.
std::vector<std::size_t> site_pixels(const PatchSet& sites, std::span<const std::size_t> indices, std::size_t width);

/// Band statistics over the labeled pixels; PCA over the standardised HSI of
/// `fit_pixels` only (the training split, so test pixels never shape the
/// projection).
Preprocessing fit_preprocessing(const HyperCube& hsi, const HyperCube& aux, const LabelRaster& labels,
                                std::span<const std::size_t> fit_pixels, std::size_t reduced_bands);

/// Split, preprocessing fitted on the training pixels, and the patches.
struct PreparedScene {
  Split split;
  Preprocessing prep;
  PatchSet patches;
};

PreparedScene prepare_scene(const HyperCube& hsi, const HyperCube& aux, const LabelRaster& labels,
                            std::size_t per_class_train, std::uint64_t split_seed, std::size_t reduced_bands,
                            std::size_t patch_size);

/// Standardised patches around every labeled pixel with the PCA stream filled.
PatchSet prepare_patches(const Preprocessing& prep, const HyperCube& hsi, const HyperCube& aux,
                         const LabelRaster& labels, std::size_t patch_size);

/// Standardised HSI of the labeled pixels as an n x c matrix, plus their labels.
struct LabeledPixels {
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t n = 0;
  std::size_t bands = 0;
};
LabeledPixels labeled_pixels(const Preprocessing& prep, const HyperCube& hsi, const LabelRaster& labels);

/// Round trip through checkpoint extra tensors.
std::vector<NamedTensor> preprocessing_tensors(const Preprocessing& prep);
Preprocessing preprocessing_from_tensors(const std::vector<NamedTensor>& tensors);

}  // namespace specband
