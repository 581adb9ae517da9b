#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace specband::oracle {

/// Classical (largest-pivot) Jacobi eigensolver on a symmetric n x n matrix.
/// Differs from the library's cyclic sweep: each step annihilates the single
/// largest off-diagonal entry, with the rotation angle from atan2.
/// Returns (eigenvalues descending, eigenvectors as columns, row-major n x n).
inline std::pair<std::vector<double>, std::vector<double>> classical_jacobi(std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  for (int iter = 0; iter < 10000; ++iter) {
    std::size_t p = 0, q = 1;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs(a[i * n + j]) > best) {
          best = std::abs(a[i * n + j]);
          p = i;
          q = j;
        }
    if (best < 1e-15) break;
    const double phi = 0.5 * std::atan2(2.0 * a[p * n + q], a[q * n + q] - a[p * n + p]);
    const double c = std::cos(phi), s = std::sin(phi);
    std::vector<double> b = a;
    for (std::size_t k = 0; k < n; ++k) {
      b[k * n + p] = c * a[k * n + p] - s * a[k * n + q];
      b[k * n + q] = s * a[k * n + p] + c * a[k * n + q];
    }
    a = b;
    for (std::size_t k = 0; k < n; ++k) {
      b[p * n + k] = c * a[p * n + k] - s * a[q * n + k];
      b[q * n + k] = s * a[p * n + k] + c * a[q * n + k];
    }
    a = b;
    for (std::size_t k = 0; k < n; ++k) {
      const double vp = v[k * n + p], vq = v[k * n + q];
      v[k * n + p] = c * vp - s * vq;
      v[k * n + q] = s * vp + c * vq;
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });
  std::vector<double> values(n), vectors(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = a[order[j] * n + order[j]];
    for (std::size_t k = 0; k < n; ++k) vectors[k * n + j] = v[k * n + order[j]];
  }
  return {values, vectors};
}

/// Sample covariance (divisor n - 1) of an n x c row-major matrix.
inline std::vector<double> covariance(const std::vector<double>& x, std::size_t n, std::size_t c) {
  std::vector<double> mean(c, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < c; ++b) mean[b] += x[i * c + b] / static_cast<double>(n);
  std::vector<double> cov(c * c, 0.0);
  for (std::size_t p = 0; p < c; ++p)
    for (std::size_t q = 0; q < c; ++q) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += (x[i * c + p] - mean[p]) * (x[i * c + q] - mean[q]);
      cov[p * c + q] = acc / static_cast<double>(n - 1);
    }
  return cov;
}

/// Two-pass Pearson correlation.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

struct Agreement {
  double oa, aa, kappa;
};

/// OA / AA / Kappa straight from the textbook definitions on a C x C count
/// matrix (rows = truth), summing with long double to stay independent of
/// the library's accumulation order.
inline Agreement agreement(const std::vector<std::vector<long>>& m) {
  const std::size_t c = m.size();
  long double total = 0, diag = 0;
  std::vector<long double> row(c, 0), col(c, 0);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      total += m[i][j];
      row[i] += m[i][j];
      col[j] += m[i][j];
      if (i == j) diag += m[i][j];
    }
  long double recall_sum = 0;
  std::size_t present = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (row[i] > 0) {
      recall_sum += m[i][i] / row[i];
      ++present;
    }
  }
  const long double po = diag / total;
  long double pe = 0;
  for (std::size_t i = 0; i < c; ++i) pe += (row[i] / total) * (col[i] / total);
  return {static_cast<double>(po), static_cast<double>(recall_sum / present),
          static_cast<double>((po - pe) / (1 - pe))};
}

}  // namespace specband::oracle
