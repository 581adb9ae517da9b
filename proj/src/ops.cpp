#include "specband/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specband/error.hpp"

namespace specband {
namespace {

void require_same_shape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::ShapeMismatch,
         std::string(op) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

void require_rank(Var a, std::size_t rank, const char* op) {
  if (a.value().rank() != rank) {
    fail(ErrorKind::ShapeMismatch, std::string(op) + ": expected rank " + std::to_string(rank) +
                                       ", got " + shape_string(a.shape()));
  }
}

template <typename Fwd, typename Deriv>
Var unary(Var a, const char* op, Fwd fwd, Deriv deriv) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  return a.graph().record(op, std::move(out), {a}, [a, deriv](Graph& g, std::span<const double> dout) {
    auto da = g.accum(a);
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += dout[i] * deriv(x[i]);
  });
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Spatial geometry shared by the 2-D and 3-D cross-correlations. A 2-D
// convolution is the depth-1 case.
struct ConvGeometry {
  std::size_t cin, d, h, w;
  std::size_t cout, kd, kh, kw;
  std::size_t pd, ph, pw;
  std::size_t od, oh, ow;
};

ConvGeometry make_geometry(std::size_t cin, std::size_t d, std::size_t h, std::size_t w,
                           const Shape& ks, bool three_d, Padding padding) {
  ConvGeometry g{};
  g.cin = cin;
  g.d = d;
  g.h = h;
  g.w = w;
  g.cout = ks[0];
  if (ks[1] != cin) {
    fail(ErrorKind::ShapeMismatch, "conv: input has " + std::to_string(cin) +
                                       " channels, kernels expect " + std::to_string(ks[1]));
  }
  g.kd = three_d ? ks[2] : 1;
  g.kh = three_d ? ks[3] : ks[2];
  g.kw = three_d ? ks[4] : ks[3];
  if (padding == Padding::Same) {
    if (g.kd % 2 == 0 || g.kh % 2 == 0 || g.kw % 2 == 0) {
      fail(ErrorKind::InvalidArgument, "conv: same padding needs odd kernel sizes");
    }
    g.pd = g.kd / 2;
    g.ph = g.kh / 2;
    g.pw = g.kw / 2;
  }
  if (g.d + 2 * g.pd < g.kd || g.h + 2 * g.ph < g.kh || g.w + 2 * g.pw < g.kw) {
    fail(ErrorKind::ShapeMismatch, "conv: kernel larger than padded input");
  }
  g.od = g.d + 2 * g.pd - g.kd + 1;
  g.oh = g.h + 2 * g.ph - g.kh + 1;
  g.ow = g.w + 2 * g.pw - g.kw + 1;
  return g;
}

// Output index range [lo, hi) for which input index o + k - pad is in [0, n).
inline std::pair<std::size_t, std::size_t> valid_range(std::size_t out_n, std::size_t n,
                                                       std::size_t k, std::size_t pad) {
  const std::size_t lo = pad > k ? pad - k : 0;
  const std::size_t hi = std::min(out_n, n + pad - k);
  return {lo, std::max(lo, hi)};
}

// Visits every (output, input, weight) triple contributing to the correlation.
// `body(out_row, in_row, weight_index, len)` handles one contiguous row run.
template <typename Body>
void for_each_conv_run(const ConvGeometry& g, Body body) {
  for (std::size_t co = 0; co < g.cout; ++co) {
    for (std::size_t ci = 0; ci < g.cin; ++ci) {
      for (std::size_t a = 0; a < g.kd; ++a) {
        const auto [z0, z1] = valid_range(g.od, g.d, a, g.pd);
        for (std::size_t b = 0; b < g.kh; ++b) {
          const auto [y0, y1] = valid_range(g.oh, g.h, b, g.ph);
          for (std::size_t c = 0; c < g.kw; ++c) {
            const auto [x0, x1] = valid_range(g.ow, g.w, c, g.pw);
            if (x1 <= x0) continue;
            const std::size_t widx = (((co * g.cin + ci) * g.kd + a) * g.kh + b) * g.kw + c;
            for (std::size_t z = z0; z < z1; ++z) {
              const std::size_t iz = z + a - g.pd;
              for (std::size_t y = y0; y < y1; ++y) {
                const std::size_t iy = y + b - g.ph;
                const std::size_t out_row = ((co * g.od + z) * g.oh + y) * g.ow + x0;
                const std::size_t in_row = ((ci * g.d + iz) * g.h + iy) * g.w + (x0 + c - g.pw);
                body(out_row, in_row, widx, x1 - x0);
              }
            }
          }
        }
      }
    }
  }
}

Var conv_impl(Var x, Var kernels, const ConvGeometry& geo, Shape out_shape, const char* op) {
  const Tensor& in = x.value();
  const Tensor& k = kernels.value();
  Tensor out(std::move(out_shape));
  for_each_conv_run(geo, [&](std::size_t orow, std::size_t irow, std::size_t widx, std::size_t len) {
    const double wv = k[widx];
    double* o = out.data().data() + orow;
    const double* i = in.data().data() + irow;
    for (std::size_t t = 0; t < len; ++t) o[t] += wv * i[t];
  });
  return x.graph().record(op, std::move(out), {x, kernels},
                          [x, kernels, geo](Graph& g, std::span<const double> dout) {
                            auto dx = g.accum(x);
                            auto dk = g.accum(kernels);
                            const Tensor& in = x.value();
                            const Tensor& k = kernels.value();
                            for_each_conv_run(geo, [&](std::size_t orow, std::size_t irow,
                                                       std::size_t widx, std::size_t len) {
                              const double* go = dout.data() + orow;
                              if (!dx.empty()) {
                                const double wv = k[widx];
                                double* gi = dx.data() + irow;
                                for (std::size_t t = 0; t < len; ++t) gi[t] += wv * go[t];
                              }
                              if (!dk.empty()) {
                                const double* i = in.data().data() + irow;
                                double acc = 0.0;
                                for (std::size_t t = 0; t < len; ++t) acc += go[t] * i[t];
                                dk[widx] += acc;
                              }
                            });
                          });
}

}  // namespace

Var matmul(Var a, Var b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), n = a.dim(1), p = b.dim(1);
  if (b.dim(0) != n) {
    fail(ErrorKind::ShapeMismatch,
         "matmul: inner dimensions " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out({m, p});
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = out.data().data() + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = av[i * n + k];
      const double* brow = bv.data().data() + k * p;
      for (std::size_t j = 0; j < p; ++j) crow[j] += aik * brow[j];
    }
  }
  return a.graph().record("matmul", std::move(out), {a, b},
                          [a, b, m, n, p](Graph& g, std::span<const double> dout) {
                            const Tensor& av = a.value();
                            const Tensor& bv = b.value();
                            if (auto da = g.accum(a); !da.empty()) {
                              for (std::size_t i = 0; i < m; ++i) {
                                for (std::size_t k = 0; k < n; ++k) {
                                  double acc = 0.0;
                                  for (std::size_t j = 0; j < p; ++j) acc += dout[i * p + j] * bv[k * p + j];
                                  da[i * n + k] += acc;
                                }
                              }
                            }
                            if (auto db = g.accum(b); !db.empty()) {
                              for (std::size_t i = 0; i < m; ++i) {
                                for (std::size_t k = 0; k < n; ++k) {
                                  const double aik = av[i * n + k];
                                  for (std::size_t j = 0; j < p; ++j) db[k * p + j] += aik * dout[i * p + j];
                                }
                              }
                            }
                          });
}

Var transpose(Var a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  const Tensor& av = a.value();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return a.graph().record("transpose", std::move(out), {a}, [a, m, n](Graph& g, std::span<const double> dout) {
    auto da = g.accum(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) da[i * n + j] += dout[j * m + i];
  });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.graph().record("reshape", std::move(out), {a}, [a](Graph& g, std::span<const double> dout) {
    auto da = g.accum(a);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += dout[i];
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return a.graph().record("add", std::move(out), {a, b}, [a, b](Graph& g, std::span<const double> dout) {
    for (Var v : {a, b}) {
      auto dv = g.accum(v);
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += dout[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return a.graph().record("sub", std::move(out), {a, b}, [a, b](Graph& g, std::span<const double> dout) {
    auto da = g.accum(a);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += dout[i];
    auto db = g.accum(b);
    for (std::size_t i = 0; i < db.size(); ++i) db[i] -= dout[i];
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return a.graph().record("mul", std::move(out), {a, b}, [a, b](Graph& g, std::span<const double> dout) {
    auto da = g.accum(a);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += dout[i] * b.value()[i];
    auto db = g.accum(b);
    for (std::size_t i = 0; i < db.size(); ++i) db[i] += dout[i] * a.value()[i];
  });
}

Var scale(Var a, double factor) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * factor;
  return a.graph().record("scale", std::move(out), {a}, [a, factor](Graph& g, std::span<const double> dout) {
    auto da = g.accum(a);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += dout[i] * factor;
  });
}

namespace {

enum class Broadcast { Row, Col };

// rows x cols view of `a` with `b` indexing one of the two axes.
std::pair<std::size_t, std::size_t> broadcast_view(Var a, Var b, Broadcast mode, const char* op) {
  if (a.value().rank() == 0 || a.size() == 0) fail(ErrorKind::ShapeMismatch, std::string(op) + ": empty tensor");
  std::size_t rows = 0, cols = 0;
  if (mode == Broadcast::Row) {
    rows = a.dim(0);
    cols = a.size() / rows;
  } else {
    cols = a.shape().back();
    rows = a.size() / cols;
  }
  const std::size_t want = mode == Broadcast::Row ? rows : cols;
  if (b.value().rank() != 1 || b.size() != want) {
    fail(ErrorKind::ShapeMismatch, std::string(op) + ": " + shape_string(b.shape()) +
                                       " does not broadcast over " + shape_string(a.shape()));
  }
  return {rows, cols};
}

Var broadcast_add(Var a, Var b, Broadcast mode, const char* op) {
  const auto [rows, cols] = broadcast_view(a, b, mode, op);
  Tensor out(a.shape());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out[i * cols + j] = av[i * cols + j] + bv[mode == Broadcast::Row ? i : j];
  return a.graph().record(op, std::move(out), {a, b},
                          [a, b, mode, rows, cols](Graph& g, std::span<const double> dout) {
                            auto da = g.accum(a);
                            for (std::size_t i = 0; i < da.size(); ++i) da[i] += dout[i];
                            if (auto db = g.accum(b); !db.empty()) {
                              for (std::size_t i = 0; i < rows; ++i)
                                for (std::size_t j = 0; j < cols; ++j)
                                  db[mode == Broadcast::Row ? i : j] += dout[i * cols + j];
                            }
                          });
}

Var broadcast_mul(Var a, Var b, Broadcast mode, const char* op) {
  const auto [rows, cols] = broadcast_view(a, b, mode, op);
  Tensor out(a.shape());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out[i * cols + j] = av[i * cols + j] * bv[mode == Broadcast::Row ? i : j];
  return a.graph().record(op, std::move(out), {a, b},
                          [a, b, mode, rows, cols](Graph& g, std::span<const double> dout) {
                            const Tensor& av = a.value();
                            const Tensor& bv = b.value();
                            auto da = g.accum(a);
                            auto db = g.accum(b);
                            for (std::size_t i = 0; i < rows; ++i) {
                              for (std::size_t j = 0; j < cols; ++j) {
                                const std::size_t bi = mode == Broadcast::Row ? i : j;
                                if (!da.empty()) da[i * cols + j] += dout[i * cols + j] * bv[bi];
                                if (!db.empty()) db[bi] += dout[i * cols + j] * av[i * cols + j];
                              }
                            }
                          });
}

}  // namespace

Var add_per_row(Var a, Var b) { return broadcast_add(a, b, Broadcast::Row, "add_per_row"); }
Var mul_per_row(Var a, Var b) { return broadcast_mul(a, b, Broadcast::Row, "mul_per_row"); }
Var add_per_col(Var a, Var b) { return broadcast_add(a, b, Broadcast::Col, "add_per_col"); }
Var mul_per_col(Var a, Var b) { return broadcast_mul(a, b, Broadcast::Col, "mul_per_col"); }

Var sigmoid(Var a) {
  return unary(a, "sigmoid", sigmoid_scalar, [](double x) {
    const double s = sigmoid_scalar(x);
    return s * (1.0 - s);
  });
}

Var relu(Var a) {
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var gelu(Var a) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
  return unary(
      a, "gelu", [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [](double x) { return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x); });
}

Var softmax(Var a, std::size_t axis) {
  const Shape& shape = a.shape();
  if (axis >= shape.size()) fail(ErrorKind::InvalidArgument, "softmax: axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  const Tensor& x = a.value();
  Tensor out(shape);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double top = x[base];
      for (std::size_t t = 1; t < len; ++t) top = std::max(top, x[base + t * inner]);
      double total = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        const double e = std::exp(x[base + t * inner] - top);
        out[base + t * inner] = e;
        total += e;
      }
      for (std::size_t t = 0; t < len; ++t) out[base + t * inner] /= total;
    }
  }
  Tensor saved = out;
  return a.graph().record(
      "softmax", std::move(out), {a},
      [a, y = std::move(saved), outer, inner, len](Graph& g, std::span<const double> dout) {
        auto da = g.accum(a);
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * len * inner + in;
            double dot = 0.0;
            for (std::size_t t = 0; t < len; ++t) dot += dout[base + t * inner] * y[base + t * inner];
            for (std::size_t t = 0; t < len; ++t) {
              const std::size_t idx = base + t * inner;
              da[idx] += y[idx] * (dout[idx] - dot);
            }
          }
        }
      });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return a.graph().record("sum", Tensor::scalar(total), {a}, [a](Graph& g, std::span<const double> dout) {
    auto da = g.accum(a);
    for (double& v : da) v += dout[0];
  });
}

Var mean(Var a) {
  if (a.size() == 0) fail(ErrorKind::ShapeMismatch, "mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Var global_avg_pool(Var x) {
  if (x.value().rank() < 2) fail(ErrorKind::ShapeMismatch, "global_avg_pool: need [C x ...]");
  const std::size_t channels = x.dim(0);
  const std::size_t spatial = x.size() / channels;
  const Tensor& xv = x.value();
  Tensor out({channels});
  for (std::size_t c = 0; c < channels; ++c) {
    double total = 0.0;
    for (std::size_t s = 0; s < spatial; ++s) total += xv[c * spatial + s];
    out[c] = total / static_cast<double>(spatial);
  }
  return x.graph().record("global_avg_pool", std::move(out), {x},
                          [x, channels, spatial](Graph& g, std::span<const double> dout) {
                            auto dx = g.accum(x);
                            const double inv = 1.0 / static_cast<double>(spatial);
                            for (std::size_t c = 0; c < channels; ++c)
                              for (std::size_t s = 0; s < spatial; ++s) dx[c * spatial + s] += dout[c] * inv;
                          });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorKind::InvalidArgument, "concat of nothing");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t lead = 0;
  for (const Var& p : parts) {
    Shape t(p.shape().begin() + 1, p.shape().end());
    if (t != tail) fail(ErrorKind::ShapeMismatch, "concat: trailing shapes differ");
    lead += p.dim(0);
  }
  Shape shape{lead};
  shape.insert(shape.end(), tail.begin(), tail.end());
  Tensor out(shape);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += p.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].graph().record("concat", std::move(out), inputs,
                                 [inputs](Graph& g, std::span<const double> dout) {
                                   std::size_t offset = 0;
                                   for (const Var& p : inputs) {
                                     auto dp = g.accum(p);
                                     for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += dout[offset + i];
                                     offset += p.size();
                                   }
                                 });
}

Var gather_columns(Var a, std::span<const std::size_t> cols) {
  require_rank(a, 2, "gather_columns");
  const std::size_t m = a.dim(0), n = a.dim(1), k = cols.size();
  for (std::size_t c : cols) {
    if (c >= n) fail(ErrorKind::IndexOutOfRange, "gather_columns: index " + std::to_string(c) + " >= " + std::to_string(n));
  }
  std::vector<std::size_t> idx(cols.begin(), cols.end());
  const Tensor& av = a.value();
  Tensor out({m, k});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] = av[i * n + idx[j]];
  return a.graph().record("gather_columns", std::move(out), {a},
                          [a, idx, m, n, k](Graph& g, std::span<const double> dout) {
                            auto da = g.accum(a);
                            for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t j = 0; j < k; ++j) da[i * n + idx[j]] += dout[i * k + j];
                          });
}

Var gather(Var a, std::span<const std::size_t> idx) {
  require_rank(a, 1, "gather");
  const std::size_t n = a.size();
  for (std::size_t c : idx) {
    if (c >= n) fail(ErrorKind::IndexOutOfRange, "gather: index " + std::to_string(c) + " >= " + std::to_string(n));
  }
  std::vector<std::size_t> keep(idx.begin(), idx.end());
  Tensor out({keep.size()});
  for (std::size_t j = 0; j < keep.size(); ++j) out[j] = a.value()[keep[j]];
  return a.graph().record("gather", std::move(out), {a}, [a, keep](Graph& g, std::span<const double> dout) {
    auto da = g.accum(a);
    for (std::size_t j = 0; j < keep.size(); ++j) da[keep[j]] += dout[j];
  });
}

Var conv2d(Var x, Var kernels, Padding padding) {
  require_rank(x, 3, "conv2d");
  require_rank(kernels, 4, "conv2d");
  const auto geo = make_geometry(x.dim(0), 1, x.dim(1), x.dim(2), kernels.shape(), false, padding);
  return conv_impl(x, kernels, geo, {geo.cout, geo.oh, geo.ow}, "conv2d");
}

Var conv3d(Var x, Var kernels, Padding padding) {
  require_rank(x, 4, "conv3d");
  require_rank(kernels, 5, "conv3d");
  const auto geo = make_geometry(x.dim(0), x.dim(1), x.dim(2), x.dim(3), kernels.shape(), true, padding);
  return conv_impl(x, kernels, geo, {geo.cout, geo.od, geo.oh, geo.ow}, "conv3d");
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  require_rank(logits, 2, "cross_entropy");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) fail(ErrorKind::ShapeMismatch, "cross_entropy: label count != batch");
  std::vector<int> target(labels.begin(), labels.end());
  for (int t : target) {
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      fail(ErrorKind::IndexOutOfRange, "cross_entropy: label " + std::to_string(t));
    }
  }
  const Tensor& z = logits.value();
  Tensor probs({batch, classes});
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = z.data().data() + b * classes;
    const double top = *std::max_element(row, row + classes);
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      probs[b * classes + c] = std::exp(row[c] - top);
      total += probs[b * classes + c];
    }
    for (std::size_t c = 0; c < classes; ++c) probs[b * classes + c] /= total;
    loss += -(row[target[b]] - top - std::log(total));
  }
  loss /= static_cast<double>(batch);
  return logits.graph().record(
      "cross_entropy", Tensor::scalar(loss), {logits},
      [logits, target, p = std::move(probs), batch, classes](Graph& g, std::span<const double> dout) {
        auto dz = g.accum(logits);
        const double s = dout[0] / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < classes; ++c) {
            const double indicator = static_cast<int>(c) == target[b] ? 1.0 : 0.0;
            dz[b * classes + c] += s * (p[b * classes + c] - indicator);
          }
        }
      });
}

}  // namespace specband
