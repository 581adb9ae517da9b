#include <gtest/gtest.h>

#include <cmath>

#include "specband/error.hpp"
#include "specband/pipeline.hpp"

using namespace specband;

namespace {

SynthScene small_scene(std::uint64_t seed, double labeled_fraction = 1.0) {
  SynthSpec spec;
  spec.height = 16;
  spec.width = 16;
  spec.bands = 10;
  spec.planted_bands = {1, 6};
  spec.classes = 2;
  spec.labeled_fraction = labeled_fraction;
  spec.seed = seed;
  return synth_generate(spec);
}

}  // namespace

TEST(Pipeline, LabelSitesFollowPatchOrder) {
  const SynthScene s = small_scene(3, 0.6);
  const PatchSet sites = label_sites(s.labels);
  const PatchSet full = extract_patches(s.hsi, s.aux, s.labels, 3);
  ASSERT_EQ(sites.size(), full.size());
  EXPECT_EQ(sites.num_classes, full.num_classes);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    EXPECT_EQ(sites.patches[i].row, full.patches[i].row);
    EXPECT_EQ(sites.patches[i].col, full.patches[i].col);
    EXPECT_EQ(sites.patches[i].label, full.patches[i].label);
    EXPECT_TRUE(sites.patches[i].hsi.empty());
  }
}

TEST(Pipeline, PcaIsFittedOnTrainingPixels) {
  const SynthScene s = small_scene(4);
  const PreparedScene sc = prepare_scene(s.hsi, s.aux, s.labels, 20, 9, 3, 3);
  const HyperCube norm = apply_band_stats(s.hsi, sc.prep.hsi_stats);
  std::vector<std::size_t> train_px;
  for (std::size_t i : sc.split.train) {
    train_px.push_back(sc.patches.patches[i].row * s.labels.width + sc.patches.patches[i].col);
  }
  const PcaModel expected = pca_fit(pixel_matrix(norm, train_px), train_px.size(), norm.bands, 3);
  EXPECT_EQ(expected.components, sc.prep.pca.components);
  EXPECT_EQ(expected.mean, sc.prep.pca.mean);

  std::vector<std::size_t> all_px(norm.pixels());
  for (std::size_t i = 0; i < all_px.size(); ++i) all_px[i] = i;
  const PcaModel leaky = pca_fit(pixel_matrix(norm, all_px), all_px.size(), norm.bands, 3);
  EXPECT_NE(leaky.mean, sc.prep.pca.mean);
}

TEST(Pipeline, BandStatsUseLabeledPixelsOnly) {
  SynthScene s = small_scene(5, 0.5);
  const PatchSet sites = label_sites(s.labels);
  const Split sp = split(sites, 5, 1);
  const std::vector<std::size_t> fit = site_pixels(sites, sp.train, s.labels.width);
  const Preprocessing before = fit_preprocessing(s.hsi, s.aux, s.labels, fit, 2);
  for (std::size_t i = 0; i < s.labels.labels.size(); ++i) {
    if (s.labels.labels[i] == 0) {
      for (std::size_t b = 0; b < s.hsi.bands; ++b) s.hsi.values[b * s.hsi.pixels() + i] = 1e6;
    }
  }
  const Preprocessing after = fit_preprocessing(s.hsi, s.aux, s.labels, fit, 2);
  EXPECT_EQ(before.hsi_stats.mean, after.hsi_stats.mean);
  EXPECT_EQ(before.hsi_stats.inv_std, after.hsi_stats.inv_std);
  EXPECT_EQ(before.pca.components, after.pca.components);
}

TEST(Pipeline, PreparedPatchesCarryProjection) {
  const SynthScene s = small_scene(6);
  const PreparedScene sc = prepare_scene(s.hsi, s.aux, s.labels, 10, 2, 3, 5);
  ASSERT_EQ(sc.patches.reduced_bands, 3u);
  const HyperCube norm = apply_band_stats(s.hsi, sc.prep.hsi_stats);
  const Patch& p = sc.patches.patches[17];
  std::vector<double> spectrum(norm.bands);
  for (std::size_t b = 0; b < norm.bands; ++b) spectrum[b] = norm.at(b, p.row, p.col);
  const std::vector<double> proj = pca_project(sc.prep.pca, spectrum);
  // Centre of the 5x5 window is (2, 2).
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p.reduced[(j * 5 + 2) * 5 + 2], proj[j], 1e-12);
}

TEST(Pipeline, PreprocessingTensorsRoundTrip) {
  const SynthScene s = small_scene(7);
  const PreparedScene sc = prepare_scene(s.hsi, s.aux, s.labels, 10, 2, 3, 3);
  const Preprocessing back = preprocessing_from_tensors(preprocessing_tensors(sc.prep));
  EXPECT_EQ(back.hsi_stats.mean, sc.prep.hsi_stats.mean);
  EXPECT_EQ(back.aux_stats.inv_std, sc.prep.aux_stats.inv_std);
  EXPECT_EQ(back.pca.components, sc.prep.pca.components);
  EXPECT_EQ(back.pca.explained_variance, sc.prep.pca.explained_variance);
  EXPECT_EQ(back.pca.rank, 3u);
  EXPECT_EQ(back.pca.bands, 10u);
}

TEST(Pipeline, MissingPreprocessingTensorIsHeaderMismatch) {
  const SynthScene s = small_scene(8);
  std::vector<NamedTensor> t = preprocessing_tensors(prepare_scene(s.hsi, s.aux, s.labels, 4, 1, 2, 3).prep);
  t.pop_back();
  try {
    preprocessing_from_tensors(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HeaderMismatch);
  }
}

TEST(Pipeline, EmptyTrainSplitCannotFitPca) {
  const SynthScene s = small_scene(9);
  try {
    prepare_scene(s.hsi, s.aux, s.labels, 0, 1, 2, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientSamples);
  }
}
