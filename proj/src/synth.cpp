#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "specband/dataio.hpp"
#include "specband/error.hpp"
#include "specband/rng.hpp"

namespace specband {
namespace {

// Per-class mean offsets for one informative band. Every pair of classes is
// separated by at least `gap`, with the closest pair at exactly `gap`. For
// three or more classes the signature direction rotates with `index` so that
// different informative bands are not collinear.
std::vector<double> class_levels(int classes, std::size_t index, std::size_t count, double gap) {
  std::vector<double> w(static_cast<std::size_t>(classes), 0.0);
  if (classes == 2) {
    w[index % 2 == 0 ? 1 : 0] = 1.0;
  } else {
    double theta = std::numbers::pi * (static_cast<double>(index) + 0.5) / static_cast<double>(count);
    for (int attempt = 0;; ++attempt) {
      for (int c = 0; c < classes; ++c) w[c] = std::cos(2.0 * std::numbers::pi * c / classes + theta);
      double closest = std::numeric_limits<double>::infinity();
      for (int a = 0; a < classes; ++a)
        for (int b = a + 1; b < classes; ++b) closest = std::min(closest, std::abs(w[a] - w[b]));
      if (closest > 1e-3 || attempt > 8) {
        for (double& v : w) v /= closest;
        break;
      }
      theta += std::numbers::pi / (4.0 * classes);
    }
  }
  for (double& v : w) v *= gap;
  return w;
}

// Quantised offsets keep noiseless scenes exactly representable in f32.
double dyadic(double x) { return std::round(x * 256.0) / 256.0; }

double to_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

}  // namespace

void SynthSpec::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::InvalidSpec, what); };
  if (height == 0 || width == 0) bad("height and width must be positive");
  if (classes < 2) bad("classes must be >= 2, got " + std::to_string(classes));
  if (bands == 0) bad("bands must be >= 1");
  if (aux_bands == 0) bad("aux_bands must be >= 1");
  if (planted_bands.empty()) bad("at least one planted band is required");
  if (planted_bands.size() > bands) {
    bad("planted band count " + std::to_string(planted_bands.size()) + " exceeds bands " + std::to_string(bands));
  }
  std::set<std::size_t> seen;
  for (std::size_t b : planted_bands) {
    if (b >= bands) {
      bad("planted band " + std::to_string(b) + " out of range [0, " + std::to_string(bands) + ")");
    }
    if (!seen.insert(b).second) bad("planted band " + std::to_string(b) + " listed twice");
  }
  if (!(noise_sigma >= 0.0)) bad("noise_sigma must be >= 0");
  if (!(aux_noise_sigma >= 0.0)) bad("aux_noise_sigma must be >= 0");
  if (!(redundancy_rho >= 0.0 && redundancy_rho <= 1.0)) bad("redundancy_rho must lie in [0, 1]");
  if (!(class_signature_gap >= 0.0) || !(aux_signature_gap >= 0.0)) bad("signature gaps must be >= 0");
  if (!(region_size > 0.0)) bad("region_size must be positive");
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) bad("labeled_fraction must lie in (0, 1]");
}

SynthScene synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t h = spec.height, w = spec.width, n = h * w;
  const auto classes = static_cast<std::size_t>(spec.classes);

  // Label regions: nearest-seed (Voronoi) partition with classes dealt
  // round-robin so every class owns at least one region.
  const auto region_area = spec.region_size * spec.region_size;
  const std::size_t n_seeds =
      std::max(classes, static_cast<std::size_t>(std::ceil(static_cast<double>(n) / region_area)));
  std::vector<double> seed_y(n_seeds), seed_x(n_seeds);
  std::vector<int> seed_class(n_seeds);
  for (std::size_t s = 0; s < n_seeds; ++s) {
    seed_y[s] = rng.uniform(0.0, static_cast<double>(h));
    seed_x[s] = rng.uniform(0.0, static_cast<double>(w));
    seed_class[s] = static_cast<int>(s % classes) + 1;
  }
  rng.shuffle(seed_class);

  std::vector<int> region_class(n);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const double dy = static_cast<double>(r) + 0.5 - seed_y[s];
        const double dx = static_cast<double>(c) + 0.5 - seed_x[s];
        const double d = dy * dy + dx * dx;
        if (d < best) {
          best = d;
          arg = s;
        }
      }
      region_class[r * w + c] = seed_class[arg];
    }
  }

  SynthScene scene;
  scene.labels = LabelRaster(h, w);
  for (std::size_t i = 0; i < n; ++i) {
    const bool labeled = spec.labeled_fraction >= 1.0 || rng.uniform() < spec.labeled_fraction;
    scene.labels.labels[i] = labeled ? region_class[i] : 0;
  }
  // Keep class ids dense over the labeled set even for sparse labelings.
  for (int k = 1; k <= spec.classes; ++k) {
    if (std::find(scene.labels.labels.begin(), scene.labels.labels.end(), k) != scene.labels.labels.end()) continue;
    const auto it = std::find(region_class.begin(), region_class.end(), k);
    scene.labels.labels[static_cast<std::size_t>(it - region_class.begin())] = k;
  }

  scene.planted = spec.planted_bands;
  std::sort(scene.planted.begin(), scene.planted.end());
  std::vector<int> planted_slot(spec.bands, -1);
  for (std::size_t t = 0; t < scene.planted.size(); ++t) planted_slot[scene.planted[t]] = static_cast<int>(t);

  // HSI.
  const double sigma = spec.noise_sigma;
  const double shared = std::sqrt(spec.redundancy_rho);
  const double own = std::sqrt(1.0 - spec.redundancy_rho);
  std::vector<double> offset(spec.bands), slope(spec.bands);
  for (std::size_t b = 0; b < spec.bands; ++b) {
    offset[b] = dyadic(rng.normal());
    slope[b] = rng.uniform(0.5, 1.5);
  }
  std::vector<std::vector<double>> levels(scene.planted.size());
  for (std::size_t t = 0; t < scene.planted.size(); ++t) {
    levels[t] = class_levels(spec.classes, t, scene.planted.size(), spec.class_signature_gap);
  }
  scene.hsi = HyperCube(h, w, spec.bands, SourceKind::Hsi);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = static_cast<std::size_t>(region_class[i] - 1);
    if (spec.complementary) k = std::min<std::size_t>(k, 1);
    const double latent = rng.normal();
    for (std::size_t b = 0; b < spec.bands; ++b) {
      const double noise = rng.normal();
      double v = offset[b];
      if (planted_slot[b] >= 0) {
        v += levels[static_cast<std::size_t>(planted_slot[b])][k] + sigma * noise;
      } else {
        v += slope[b] * sigma * (shared * latent + own * noise);
      }
      scene.hsi.values[b * n + i] = to_f32(v);
    }
  }

  // Auxiliary source: class-dependent structural levels, independent noise.
  scene.aux = HyperCube(h, w, spec.aux_bands, SourceKind::Aux);
  std::vector<std::vector<double>> aux_levels(spec.aux_bands);
  std::vector<double> aux_offset(spec.aux_bands);
  for (std::size_t m = 0; m < spec.aux_bands; ++m) {
    aux_levels[m] = class_levels(spec.classes, m, spec.aux_bands, spec.aux_signature_gap);
    aux_offset[m] = dyadic(rng.normal());
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = static_cast<std::size_t>(region_class[i] - 1);
    if (spec.complementary) k = std::max<std::size_t>(k, 1);
    for (std::size_t m = 0; m < spec.aux_bands; ++m) {
      const double v = aux_offset[m] + aux_levels[m][k] + spec.aux_noise_sigma * rng.normal();
      scene.aux.values[m * n + i] = to_f32(v);
    }
  }
  return scene;
}

}  // namespace specband
