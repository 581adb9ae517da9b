#include <algorithm>

#include "specband/dataio.hpp"
#include "specband/error.hpp"
#include "specband/rng.hpp"

namespace specband {

std::size_t reflect_index(long index, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * (static_cast<long>(n) - 1);
  long i = index % period;
  if (i < 0) i += period;
  if (i >= static_cast<long>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

std::vector<double> extract_window(const HyperCube& cube, std::size_t row, std::size_t col,
                                   std::size_t patch_size) {
  const long half = static_cast<long>(patch_size / 2);
  std::vector<std::size_t> rows(patch_size), cols(patch_size);
  for (std::size_t t = 0; t < patch_size; ++t) {
    rows[t] = reflect_index(static_cast<long>(row) + static_cast<long>(t) - half, cube.height);
    cols[t] = reflect_index(static_cast<long>(col) + static_cast<long>(t) - half, cube.width);
  }
  std::vector<double> window(cube.bands * patch_size * patch_size);
  for (std::size_t b = 0; b < cube.bands; ++b)
    for (std::size_t y = 0; y < patch_size; ++y)
      for (std::size_t x = 0; x < patch_size; ++x)
        window[(b * patch_size + y) * patch_size + x] = cube.at(b, rows[y], cols[x]);
  return window;
}

PatchSet extract_patches(const HyperCube& hsi, const HyperCube& aux, const LabelRaster& labels,
                         std::size_t patch_size) {
  if (patch_size % 2 == 0) fail(ErrorKind::EvenPatchSize, "patch size " + std::to_string(patch_size) + " is not odd");
  hsi.validate();
  aux.validate();
  if (hsi.height != aux.height || hsi.width != aux.width || hsi.height != labels.height ||
      hsi.width != labels.width) {
    fail(ErrorKind::RegistrationMismatch, "HSI, auxiliary and label rasters must share height and width");
  }
  PatchSet set;
  set.patch_size = patch_size;
  set.hsi_bands = hsi.bands;
  set.aux_bands = aux.bands;
  set.num_classes = labels.num_classes();
  set.patches.reserve(labels.labeled_count());
  for (std::size_t r = 0; r < labels.height; ++r) {
    for (std::size_t c = 0; c < labels.width; ++c) {
      const int label = labels.at(r, c);
      if (label <= 0) continue;
      Patch p;
      p.hsi = extract_window(hsi, r, c, patch_size);
      p.aux = extract_window(aux, r, c, patch_size);
      p.label = label;
      p.row = r;
      p.col = c;
      set.patches.push_back(std::move(p));
    }
  }
  return set;
}

Split split(const PatchSet& patches, std::span<const std::size_t> per_class_train, std::uint64_t seed) {
  const int classes = patches.num_classes;
  if (per_class_train.size() < static_cast<std::size_t>(classes)) {
    fail(ErrorKind::InvalidArgument, "per-class train counts given for " + std::to_string(per_class_train.size()) +
                                         " classes, data has " + std::to_string(classes));
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < patches.size(); ++i) {
    by_class[static_cast<std::size_t>(patches.patches[i].label - 1)].push_back(i);
  }
  Rng rng(seed);
  Split out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (per_class_train[c] > members.size()) {
      fail(ErrorKind::InsufficientSamples, "class " + std::to_string(c + 1) + " has " +
                                               std::to_string(members.size()) + " samples, " +
                                               std::to_string(per_class_train[c]) + " requested for training");
    }
    rng.shuffle(members);
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(per_class_train[c]));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(per_class_train[c]), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Split split(const PatchSet& patches, std::size_t per_class_train, std::uint64_t seed) {
  const std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(patches.num_classes, 0)), per_class_train);
  return split(patches, counts, seed);
}

PatchSet subset(const PatchSet& patches, std::span<const std::size_t> indices) {
  PatchSet out;
  out.patch_size = patches.patch_size;
  out.hsi_bands = patches.hsi_bands;
  out.aux_bands = patches.aux_bands;
  out.reduced_bands = patches.reduced_bands;
  out.num_classes = patches.num_classes;
  out.patches.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= patches.size()) fail(ErrorKind::IndexOutOfRange, "subset index " + std::to_string(i));
    out.patches.push_back(patches.patches[i]);
  }
  return out;
}

}  // namespace specband
