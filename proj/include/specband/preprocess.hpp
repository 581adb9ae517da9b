#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "specband/dataio.hpp"

namespace specband {

/// Per-band affine standardisation: (x - mean) * inv_std, with inv_std = 0 for
/// constant bands so they map to all-zeros.
struct BandStats {
  std::vector<double> mean;
  std::vector<double> inv_std;
};

/// Statistics over the labeled pixels of `mask`, or all pixels when null.
BandStats fit_band_stats(const HyperCube& cube, const LabelRaster* mask = nullptr);
HyperCube apply_band_stats(const HyperCube& cube, const BandStats& stats);
/// Zero mean, unit (population) variance per band.
HyperCube normalize(const HyperCube& cube, const LabelRaster* mask = nullptr);

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<double> vectors;  // n x n, column j is the eigenvector of values[j]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on a dense symmetric n x n matrix (row-major).
SymmetricEigen jacobi_eigen(std::span<const double> matrix, std::size_t n, int max_sweeps = 100);

struct PcaModel {
  std::size_t bands = 0;                    // c
  std::size_t rank = 0;                     // r
  std::vector<double> mean;                 // c
  std::vector<double> components;           // r x c, orthonormal rows
  std::vector<double> explained_variance;   // r, non-increasing

  double component(std::size_t j, std::size_t b) const { return components[j * bands + b]; }
};

/// Principal axes of `pixels` (n x c, row-major) from the sample covariance
/// (divisor n - 1). Each axis is signed so that its largest-magnitude
/// coefficient is positive.
PcaModel pca_fit(std::span<const double> pixels, std::size_t n, std::size_t c, std::size_t r);

/// (x - mean) * components^T for one spectrum.
std::vector<double> pca_project(const PcaModel& model, std::span<const double> spectrum);
HyperCube pca_apply(const PcaModel& model, const HyperCube& cube);
/// Projects every pixel of a channel-major patch; returns r x p x p.
std::vector<double> pca_apply_patch(const PcaModel& model, std::span<const double> patch, std::size_t patch_size);

/// Rows of `cube` at the given flat pixel indices as an n x c matrix.
std::vector<double> pixel_matrix(const HyperCube& cube, std::span<const std::size_t> pixel_indices);

/// Cube-scheme file pair: height = r + 1 rows of width c (row 0 the mean,
/// rows 1..r the components) as f64le, explained variance in the header.
void write_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel read_pca(const std::filesystem::path& path);

}  // namespace specband
