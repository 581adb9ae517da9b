#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace specband {

enum class SourceKind { Hsi, Aux };

/// Height x width x bands raster, band-sequential in memory (band-major,
/// row-major within a band).
///
/// Values are held as doubles so that preprocessing can run at full precision;
/// the on-disk payload is f32le, so only f32-representable cubes round-trip
/// bit-exactly.
struct HyperCube {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::vector<double> values;
  SourceKind source_kind = SourceKind::Hsi;

  HyperCube() = default;
  HyperCube(std::size_t h, std::size_t w, std::size_t c, SourceKind kind = SourceKind::Hsi)
      : height(h), width(w), bands(c), values(h * w * c, 0.0), source_kind(kind) {}

  std::size_t pixels() const noexcept { return height * width; }
  double& at(std::size_t band, std::size_t row, std::size_t col) {
    return values[(band * height + row) * width + col];
  }
  double at(std::size_t band, std::size_t row, std::size_t col) const {
    return values[(band * height + row) * width + col];
  }
  /// Throws HeaderMismatch unless height*width*bands == values.size().
  void validate() const;
};

/// Per-pixel class ids; 0 marks unlabeled pixels, 1..C are classes.
struct LabelRaster {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::int32_t> labels;

  LabelRaster() = default;
  LabelRaster(std::size_t h, std::size_t w) : height(h), width(w), labels(h * w, 0) {}

  std::int32_t& at(std::size_t row, std::size_t col) { return labels[row * width + col]; }
  std::int32_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }
  /// Largest class id present.
  int num_classes() const;
  std::size_t labeled_count() const;
};

/// Parsed `<name>.json` sidecar of the raster file pair.
struct RasterHeader {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::string dtype;   // f32le | i32le | f64le
  std::string layout;  // bsq
  std::string source_kind;
};

/// `path` may name either the base, the `.json` header or the `.raw` payload.
std::filesystem::path header_path(const std::filesystem::path& path);
std::filesystem::path payload_path(const std::filesystem::path& path);

RasterHeader read_raster_header(const std::filesystem::path& path);

HyperCube read_cube(const std::filesystem::path& path);
void write_cube(const HyperCube& cube, const std::filesystem::path& path);

LabelRaster read_labels(const std::filesystem::path& path);
void write_labels(const LabelRaster& labels, const std::filesystem::path& path);

/// f64le raster with extra JSON fields merged into the header; used for
/// model-side payloads (PCA components).
void write_raster_f64(std::span<const double> values, std::size_t height, std::size_t width,
                      const std::string& extra_json, const std::filesystem::path& path);
std::vector<double> read_raster_f64(const std::filesystem::path& path, RasterHeader* header = nullptr,
                                    std::string* header_json = nullptr);

/// One labeled neighborhood. Patches are channel-major: value (c, y, x) lives
/// at index (c * p + y) * p + x.
struct Patch {
  std::vector<double> hsi;
  std::vector<double> aux;
  std::vector<double> reduced;  // filled by the preprocessing pipeline
  int label = 0;                // 1..C
  std::size_t row = 0;
  std::size_t col = 0;
};

struct PatchSet {
  std::size_t patch_size = 0;
  std::size_t hsi_bands = 0;
  std::size_t aux_bands = 0;
  std::size_t reduced_bands = 0;
  int num_classes = 0;
  std::vector<Patch> patches;

  std::size_t size() const noexcept { return patches.size(); }
};

/// Maps an arbitrary index into [0, n) by mirror reflection about the edges
/// without repeating the edge sample (… 2 1 | 0 1 2 … n-1 | n-2 …).
std::size_t reflect_index(long index, std::size_t n);

/// One patch per labeled pixel in row-major order of the centers. Borders use
/// reflect padding so every patch is a full p x p window.
PatchSet extract_patches(const HyperCube& hsi, const HyperCube& aux, const LabelRaster& labels,
                         std::size_t patch_size);

/// Channel-major p x p window of `cube` centred on (row, col), reflect-padded.
std::vector<double> extract_window(const HyperCube& cube, std::size_t row, std::size_t col,
                                   std::size_t patch_size);

struct Split {
  std::vector<std::size_t> train;  // indices into the PatchSet, ascending
  std::vector<std::size_t> test;
};

/// Stratified seeded split: per_class_train[c-1] samples of class c go to train.
Split split(const PatchSet& patches, std::span<const std::size_t> per_class_train, std::uint64_t seed);
Split split(const PatchSet& patches, std::size_t per_class_train, std::uint64_t seed);

PatchSet subset(const PatchSet& patches, std::span<const std::size_t> indices);

/// Parameters of the synthetic two-source scene.
///
/// Class means differ only on the planted bands; the remaining bands are
/// affine copies of one shared latent field plus independent noise, tuned to
/// pairwise correlation redundancy_rho. The auxiliary source carries
/// class-dependent levels with its own noise.
struct SynthSpec {
  std::size_t height = 48;
  std::size_t width = 48;
  int classes = 3;
  std::size_t bands = 30;
  std::size_t aux_bands = 4;
  std::vector<std::size_t> planted_bands{2, 7, 11, 16, 21, 27};
  double class_signature_gap = 5.0;
  double noise_sigma = 1.0;
  double redundancy_rho = 0.9;
  double aux_signature_gap = 2.0;
  double aux_noise_sigma = 1.0;
  /// Typical side length of a homogeneous label region, in pixels.
  double region_size = 6.0;
  /// Probability that a pixel carries a label.
  double labeled_fraction = 1.0;
  /// When set, the HSI signature only separates class 1 from the others and
  /// the auxiliary source cannot tell class 1 from class 2, so only the two
  /// sources together resolve every class.
  bool complementary = false;
  std::uint64_t seed = 0;

  /// Throws InvalidSpec naming the violated bound.
  void validate() const;
};

struct SynthScene {
  HyperCube hsi;
  HyperCube aux;
  LabelRaster labels;
  std::vector<std::size_t> planted;  // ascending
};

SynthScene synth_generate(const SynthSpec& spec);

}  // namespace specband
