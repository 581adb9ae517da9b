#include "specband/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "specband/error.hpp"

namespace specband {

BandStats fit_band_stats(const HyperCube& cube, const LabelRaster* mask) {
  cube.validate();
  if (cube.pixels() == 0 || cube.bands == 0) fail(ErrorKind::EmptyCube, "cube has no pixels or bands");
  if (mask && (mask->height != cube.height || mask->width != cube.width)) {
    fail(ErrorKind::RegistrationMismatch, "label mask does not match cube extent");
  }
  std::vector<std::size_t> pixels;
  pixels.reserve(cube.pixels());
  for (std::size_t i = 0; i < cube.pixels(); ++i) {
    if (!mask || mask->labels[i] > 0) pixels.push_back(i);
  }
  if (pixels.empty()) fail(ErrorKind::EmptyCube, "no labeled pixels to normalise over");

  BandStats stats;
  stats.mean.resize(cube.bands);
  stats.inv_std.resize(cube.bands);
  const double count = static_cast<double>(pixels.size());
  for (std::size_t b = 0; b < cube.bands; ++b) {
    const double* band = cube.values.data() + b * cube.pixels();
    double mean = 0.0;
    for (std::size_t i : pixels) mean += band[i];
    mean /= count;
    double var = 0.0;
    for (std::size_t i : pixels) var += (band[i] - mean) * (band[i] - mean);
    var /= count;
    stats.mean[b] = mean;
    // Variance below round-off of the band's magnitude counts as constant.
    const double floor = 1e-24 * std::max(1.0, mean * mean);
    stats.inv_std[b] = var > floor ? 1.0 / std::sqrt(var) : 0.0;
  }
  return stats;
}

HyperCube apply_band_stats(const HyperCube& cube, const BandStats& stats) {
  cube.validate();
  if (stats.mean.size() != cube.bands) fail(ErrorKind::ShapeMismatch, "band statistics do not match cube bands");
  HyperCube out = cube;
  const std::size_t n = cube.pixels();
  for (std::size_t b = 0; b < cube.bands; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      double& v = out.values[b * n + i];
      v = (v - stats.mean[b]) * stats.inv_std[b];
    }
  }
  return out;
}

HyperCube normalize(const HyperCube& cube, const LabelRaster* mask) {
  return apply_band_stats(cube, fit_band_stats(cube, mask));
}

SymmetricEigen jacobi_eigen(std::span<const double> matrix, std::size_t n, int max_sweeps) {
  if (matrix.size() != n * n) fail(ErrorKind::ShapeMismatch, "jacobi_eigen: matrix is not n x n");
  std::vector<double> a(matrix.begin(), matrix.end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double total = 0.0;
  for (double x : a) total += x * x;
  SymmetricEigen out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off <= 1e-30 * total || off == 0.0) break;
    out.sweeps = sweep + 1;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (p, q) plane rotation.
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  for (double x : a) {
    if (!std::isfinite(x)) fail(ErrorKind::RankDeficient, "Jacobi iteration produced non-finite values");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[order[j] * n + order[j]];
    for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + j] = v[k * n + order[j]];
  }
  return out;
}

PcaModel pca_fit(std::span<const double> pixels, std::size_t n, std::size_t c, std::size_t r) {
  if (pixels.size() != n * c) fail(ErrorKind::ShapeMismatch, "pca_fit: pixel matrix is not n x c");
  if (r < 1 || r > c || n < r) {
    fail(ErrorKind::InvalidArgument, "pca_fit needs n >= r >= 1 and r <= c (n=" + std::to_string(n) +
                                         ", c=" + std::to_string(c) + ", r=" + std::to_string(r) + ")");
  }
  PcaModel model;
  model.bands = c;
  model.rank = r;
  model.mean.assign(c, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < c; ++b) model.mean[b] += pixels[i * c + b];
  for (double& m : model.mean) m /= static_cast<double>(n);

  std::vector<double> cov(c * c, 0.0);
  std::vector<double> centered(c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < c; ++b) centered[b] = pixels[i * c + b] - model.mean[b];
    for (std::size_t p = 0; p < c; ++p)
      for (std::size_t q = p; q < c; ++q) cov[p * c + q] += centered[p] * centered[q];
  }
  const double denom = static_cast<double>(std::max<std::size_t>(n, 2) - 1);
  for (std::size_t p = 0; p < c; ++p)
    for (std::size_t q = p; q < c; ++q) {
      cov[p * c + q] /= denom;
      cov[q * c + p] = cov[p * c + q];
    }

  const SymmetricEigen eig = jacobi_eigen(cov, c);
  model.components.resize(r * c);
  model.explained_variance.resize(r);
  for (std::size_t j = 0; j < r; ++j) {
    std::size_t pivot = 0;
    for (std::size_t b = 1; b < c; ++b) {
      if (std::abs(eig.vectors[b * c + j]) > std::abs(eig.vectors[pivot * c + j])) pivot = b;
    }
    const double sign = eig.vectors[pivot * c + j] < 0.0 ? -1.0 : 1.0;
    for (std::size_t b = 0; b < c; ++b) model.components[j * c + b] = sign * eig.vectors[b * c + j];
    model.explained_variance[j] = std::max(0.0, eig.values[j]);
  }
  return model;
}

std::vector<double> pca_project(const PcaModel& model, std::span<const double> spectrum) {
  if (spectrum.size() != model.bands) fail(ErrorKind::ShapeMismatch, "spectrum length does not match PCA model");
  std::vector<double> out(model.rank, 0.0);
  for (std::size_t j = 0; j < model.rank; ++j) {
    double acc = 0.0;
    for (std::size_t b = 0; b < model.bands; ++b) acc += (spectrum[b] - model.mean[b]) * model.component(j, b);
    out[j] = acc;
  }
  return out;
}

HyperCube pca_apply(const PcaModel& model, const HyperCube& cube) {
  cube.validate();
  if (cube.bands != model.bands) {
    fail(ErrorKind::ShapeMismatch, "cube has " + std::to_string(cube.bands) + " bands, PCA model expects " +
                                       std::to_string(model.bands));
  }
  HyperCube out(cube.height, cube.width, model.rank, cube.source_kind);
  const std::size_t n = cube.pixels();
  std::vector<double> spectrum(cube.bands);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < cube.bands; ++b) spectrum[b] = cube.values[b * n + i];
    const auto projected = pca_project(model, spectrum);
    for (std::size_t j = 0; j < model.rank; ++j) out.values[j * n + i] = projected[j];
  }
  return out;
}

std::vector<double> pca_apply_patch(const PcaModel& model, std::span<const double> patch, std::size_t patch_size) {
  const std::size_t area = patch_size * patch_size;
  if (patch.size() != model.bands * area) fail(ErrorKind::ShapeMismatch, "patch does not match PCA model bands");
  std::vector<double> out(model.rank * area);
  std::vector<double> spectrum(model.bands);
  for (std::size_t i = 0; i < area; ++i) {
    for (std::size_t b = 0; b < model.bands; ++b) spectrum[b] = patch[b * area + i];
    const auto projected = pca_project(model, spectrum);
    for (std::size_t j = 0; j < model.rank; ++j) out[j * area + i] = projected[j];
  }
  return out;
}

std::vector<double> pixel_matrix(const HyperCube& cube, std::span<const std::size_t> pixel_indices) {
  const std::size_t n = cube.pixels();
  std::vector<double> out(pixel_indices.size() * cube.bands);
  for (std::size_t r = 0; r < pixel_indices.size(); ++r) {
    if (pixel_indices[r] >= n) fail(ErrorKind::IndexOutOfRange, "pixel index out of range");
    for (std::size_t b = 0; b < cube.bands; ++b) out[r * cube.bands + b] = cube.values[b * n + pixel_indices[r]];
  }
  return out;
}

void write_pca(const PcaModel& model, const std::filesystem::path& path) {
  std::vector<double> payload = model.mean;
  payload.insert(payload.end(), model.components.begin(), model.components.end());
  nlohmann::ordered_json extra;
  extra["kind"] = "pca";
  extra["explained_variance"] = model.explained_variance;
  write_raster_f64(payload, model.rank + 1, model.bands, extra.dump(), path);
}

PcaModel read_pca(const std::filesystem::path& path) {
  RasterHeader header;
  std::string header_json;
  const std::vector<double> payload = read_raster_f64(path, &header, &header_json);
  const auto j = nlohmann::json::parse(header_json);
  if (j.value("kind", std::string()) != "pca" || header.height < 2) {
    fail(ErrorKind::HeaderMismatch, "not a PCA model file: " + path.string());
  }
  PcaModel model;
  model.bands = header.width;
  model.rank = header.height - 1;
  model.mean.assign(payload.begin(), payload.begin() + static_cast<std::ptrdiff_t>(model.bands));
  model.components.assign(payload.begin() + static_cast<std::ptrdiff_t>(model.bands), payload.end());
  model.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  if (model.explained_variance.size() != model.rank) {
    fail(ErrorKind::HeaderMismatch, "explained_variance length does not match component count");
  }
  return model;
}

}  // namespace specband
