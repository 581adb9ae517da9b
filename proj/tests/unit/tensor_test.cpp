#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "specband/error.hpp"
#include "specband/gradcheck.hpp"
#include "specband/ops.hpp"
#include "specband/rng.hpp"

using namespace specband;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Naive cross-correlation written independently of the library kernel:
// explicit zero padding, six nested loops over (co, ci, y, x, ky, kx).
Tensor naive_conv2d(const Tensor& x, const Tensor& k, bool same) {
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const long ph = same ? static_cast<long>(kh / 2) : 0;
  const long pw = same ? static_cast<long>(kw / 2) : 0;
  const std::size_t oh = h + 2 * ph - kh + 1, ow = w + 2 * pw - kw + 1;
  Tensor out({cout, oh, ow});
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xx = 0; xx < ow; ++xx)
          for (std::size_t a = 0; a < kh; ++a)
            for (std::size_t b = 0; b < kw; ++b) {
              const long iy = static_cast<long>(y + a) - ph;
              const long ix = static_cast<long>(xx + b) - pw;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
              out.at(co, y, xx) += x.at(ci, iy, ix) * k[((co * cin + ci) * kh + a) * kw + b];
            }
  return out;
}

Tensor naive_conv3d(const Tensor& x, const Tensor& k, bool same) {
  const std::size_t cin = x.dim(0), d = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = k.dim(0), kd = k.dim(2), kh = k.dim(3), kw = k.dim(4);
  const long pd = same ? static_cast<long>(kd / 2) : 0;
  const long ph = same ? static_cast<long>(kh / 2) : 0;
  const long pw = same ? static_cast<long>(kw / 2) : 0;
  const std::size_t od = d + 2 * pd - kd + 1, oh = h + 2 * ph - kh + 1, ow = w + 2 * pw - kw + 1;
  Tensor out({cout, od, oh, ow});
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t z = 0; z < od; ++z)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xx = 0; xx < ow; ++xx) {
          double acc = 0.0;
          for (std::size_t ci = 0; ci < cin; ++ci)
            for (std::size_t a = 0; a < kd; ++a)
              for (std::size_t b = 0; b < kh; ++b)
                for (std::size_t c = 0; c < kw; ++c) {
                  const long iz = static_cast<long>(z + a) - pd;
                  const long iy = static_cast<long>(y + b) - ph;
                  const long ix = static_cast<long>(xx + c) - pw;
                  if (iz < 0 || iy < 0 || ix < 0 || iz >= static_cast<long>(d) || iy >= static_cast<long>(h) ||
                      ix >= static_cast<long>(w))
                    continue;
                  acc += x[((ci * d + iz) * h + iy) * w + ix] * k[(((co * cin + ci) * kd + a) * kh + b) * kw + c];
                }
          out[((co * od + z) * oh + y) * ow + xx] = acc;
        }
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Weighted sum with fixed random weights turns any op into a scalar whose
// gradient exercises every output element differently.
Var weighted_sum(Var out, std::uint64_t seed) {
  Rng rng(seed);
  Tensor w = random_tensor(out.shape(), rng);
  return sum(mul(out, out.graph().constant(std::move(w))));
}

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Graph g;
  Var c = matmul(g.constant(Tensor::matrix({{1, 0}, {0, 1}})), g.constant(Tensor::matrix({{3, 4}, {5, 6}})));
  EXPECT_EQ(c.value().storage(), (std::vector<double>{3, 4, 5, 6}));
}

TEST(Matmul, MatchesTripleLoop) {
  Graph g;
  Var c = matmul(g.constant(Tensor::matrix({{1, 2}, {3, 4}})), g.constant(Tensor::matrix({{5}, {6}})));
  EXPECT_EQ(c.shape(), (Shape{2, 1}));
  EXPECT_EQ(c.value().storage(), (std::vector<double>{17, 39}));

  Rng rng(7);
  Tensor a = random_tensor({4, 5}, rng), b = random_tensor({5, 3}, rng);
  Var r = matmul(g.constant(a), g.constant(b));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 5; ++k) acc += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(r.value().at(i, j), acc, 1e-12);
    }
}

TEST(Matmul, BackwardWithOnesSeed) {
  Tensor a = Tensor::matrix({{1, 2}});
  Tensor b = Tensor::matrix({{3}, {4}});
  a.set_requires_grad(true);
  b.set_requires_grad(true);
  Graph g;
  g.backward(matmul(g.param(a), g.param(b)));
  EXPECT_NEAR(a.grad()[0], 3.0, 1e-12);
  EXPECT_NEAR(a.grad()[1], 4.0, 1e-12);
  EXPECT_NEAR(b.grad()[0], 1.0, 1e-12);
  EXPECT_NEAR(b.grad()[1], 2.0, 1e-12);

  Tensor* leaves[] = {&a, &b};
  const auto check = finite_diff_check([&](Graph& gg) { return sum(matmul(gg.param(a), gg.param(b))); }, leaves);
  EXPECT_LE(check.max_rel_error, 1e-8);
}

TEST(Matmul, InnerDimensionMismatchThrows) {
  Graph g;
  try {
    matmul(g.constant(Tensor({2, 3})), g.constant(Tensor({2, 3})));
    FAIL() << "expected ShapeMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(Conv2d, UnitKernelIsIdentity) {
  Rng rng(1);
  Tensor x = random_tensor({1, 3, 3}, rng);
  Graph g;
  Var y = conv2d(g.constant(x), g.constant(Tensor({1, 1, 1, 1}, 1.0)), Padding::Same);
  EXPECT_EQ(y.value().storage(), x.storage());
}

TEST(Conv2d, AllOnesValidSums) {
  Graph g;
  Var y = conv2d(g.constant(Tensor({1, 3, 3}, 1.0)), g.constant(Tensor({1, 1, 3, 3}, 1.0)), Padding::Valid);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1}));
  EXPECT_DOUBLE_EQ(y.value()[0], 9.0);
}

TEST(Conv2d, MatchesNaiveLoopOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor x = random_tensor({2, 5, 5}, rng);
    Tensor k = random_tensor({3, 2, 3, 3}, rng);
    for (bool same : {true, false}) {
      Graph g;
      Var y = conv2d(g.constant(x), g.constant(k), same ? Padding::Same : Padding::Valid);
      EXPECT_LE(max_abs_diff(y.value(), naive_conv2d(x, k, same)), 1e-12);
    }
  }
}

TEST(Conv2d, ChannelDisagreementThrows) {
  Graph g;
  EXPECT_THROW(conv2d(g.constant(Tensor({2, 4, 4})), g.constant(Tensor({1, 3, 3, 3})), Padding::Same), Error);
}

TEST(Conv3d, UnitKernelIsIdentity) {
  Rng rng(2);
  Tensor x = random_tensor({1, 3, 4, 4}, rng);
  Graph g;
  Var y = conv3d(g.constant(x), g.constant(Tensor({1, 1, 1, 1, 1}, 1.0)), Padding::Same);
  EXPECT_EQ(y.value().storage(), x.storage());
}

TEST(Conv3d, AllOnesValidSums) {
  Graph g;
  Var y = conv3d(g.constant(Tensor({1, 3, 3, 3}, 1.0)), g.constant(Tensor({1, 1, 3, 3, 3}, 1.0)), Padding::Valid);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(y.value()[0], 27.0);
}

TEST(Conv3d, MatchesNaiveLoopOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor x = random_tensor({2, 4, 5, 5}, rng);
    Tensor k = random_tensor({2, 2, 3, 3, 3}, rng);
    for (bool same : {true, false}) {
      Graph g;
      Var y = conv3d(g.constant(x), g.constant(k), same ? Padding::Same : Padding::Valid);
      EXPECT_LE(max_abs_diff(y.value(), naive_conv3d(x, k, same)), 1e-12);
    }
  }
}

TEST(Softmax, EqualLogitsAreUniform) {
  Graph g;
  Var y = softmax(g.constant(Tensor::vector({0, 0, 0})), 0);
  for (double v : y.value().data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, MatchesDirectFormula) {
  Graph g;
  Var y = softmax(g.constant(Tensor::vector({1, 2, 3})), 0);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(y.value()[0], std::exp(1.0) / z, 1e-12);
  EXPECT_NEAR(y.value()[1], std::exp(2.0) / z, 1e-12);
  EXPECT_NEAR(y.value()[2], std::exp(3.0) / z, 1e-12);
}

TEST(Softmax, ShiftInvariantAndNormalized) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor x = random_tensor({3, 7}, rng, -50.0, 50.0);
    const double shift = rng.uniform(-100.0, 100.0);
    Tensor shifted = x;
    for (double& v : shifted.data()) v += shift;
    for (std::size_t axis : {0u, 1u}) {
      Graph g;
      Var a = softmax(g.constant(x), axis);
      Var b = softmax(g.constant(shifted), axis);
      EXPECT_LE(max_abs_diff(a.value(), b.value()), 1e-12);
      const std::size_t rows = axis == 0 ? 7 : 3, len = axis == 0 ? 3 : 7;
      for (std::size_t r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t t = 0; t < len; ++t) total += axis == 0 ? a.value().at(t, r) : a.value().at(r, t);
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
    }
  }
}

TEST(Elementwise, SigmoidAndPooling) {
  Graph g;
  EXPECT_DOUBLE_EQ(sigmoid(g.constant(Tensor::scalar(0.0))).value()[0], 0.5);
  Var pooled = global_avg_pool(g.constant(Tensor({3, 4, 4}, 2.5)));
  for (double v : pooled.value().data()) EXPECT_DOUBLE_EQ(v, 2.5);
}

TEST(Gradients, EveryOpMatchesFiniteDifferences) {
  Rng rng(99);
  Tensor m = random_tensor({4, 3}, rng), n = random_tensor({4, 3}, rng), p = random_tensor({3, 2}, rng);
  Tensor row = random_tensor({4}, rng), col = random_tensor({3}, rng);
  Tensor img = random_tensor({2, 5, 5}, rng), ker = random_tensor({3, 2, 3, 3}, rng);
  Tensor vol = random_tensor({1, 4, 4, 4}, rng), ker3 = random_tensor({2, 1, 3, 3, 3}, rng);
  const std::vector<std::size_t> cols{2, 0};
  const std::vector<int> labels{0, 2, 1, 1};

  struct Case {
    const char* name;
    std::function<Var(Graph&)> build;
    std::vector<Tensor*> leaves;
  };
  const std::vector<Case> cases = {
      {"matmul", [&](Graph& g) { return matmul(g.param(m), g.param(p)); }, {&m, &p}},
      {"transpose", [&](Graph& g) { return transpose(g.param(m)); }, {&m}},
      {"reshape", [&](Graph& g) { return reshape(g.param(m), {2, 6}); }, {&m}},
      {"add", [&](Graph& g) { return add(g.param(m), g.param(n)); }, {&m, &n}},
      {"sub", [&](Graph& g) { return sub(g.param(m), g.param(n)); }, {&m, &n}},
      {"mul", [&](Graph& g) { return mul(g.param(m), g.param(n)); }, {&m, &n}},
      {"scale", [&](Graph& g) { return scale(g.param(m), -1.7); }, {&m}},
      {"add_per_row", [&](Graph& g) { return add_per_row(g.param(m), g.param(row)); }, {&m, &row}},
      {"mul_per_row", [&](Graph& g) { return mul_per_row(g.param(m), g.param(row)); }, {&m, &row}},
      {"add_per_col", [&](Graph& g) { return add_per_col(g.param(m), g.param(col)); }, {&m, &col}},
      {"mul_per_col", [&](Graph& g) { return mul_per_col(g.param(m), g.param(col)); }, {&m, &col}},
      {"sigmoid", [&](Graph& g) { return sigmoid(g.param(m)); }, {&m}},
      {"gelu", [&](Graph& g) { return gelu(g.param(m)); }, {&m}},
      {"softmax0", [&](Graph& g) { return softmax(g.param(m), 0); }, {&m}},
      {"softmax1", [&](Graph& g) { return softmax(g.param(m), 1); }, {&m}},
      {"mean", [&](Graph& g) { return mean(g.param(m)); }, {&m}},
      {"gap", [&](Graph& g) { return global_avg_pool(g.param(img)); }, {&img}},
      {"concat", [&](Graph& g) {
         const Var parts[] = {g.param(m), g.param(n)};
         return concat(parts);
       }, {&m, &n}},
      {"gather_columns", [&](Graph& g) { return gather_columns(g.param(m), cols); }, {&m}},
      {"gather", [&](Graph& g) { return gather(g.param(row), cols); }, {&row}},
      {"conv2d_same", [&](Graph& g) { return conv2d(g.param(img), g.param(ker), Padding::Same); }, {&img, &ker}},
      {"conv2d_valid", [&](Graph& g) { return conv2d(g.param(img), g.param(ker), Padding::Valid); }, {&img, &ker}},
      {"conv3d_same", [&](Graph& g) { return conv3d(g.param(vol), g.param(ker3), Padding::Same); }, {&vol, &ker3}},
      {"cross_entropy", [&](Graph& g) { return cross_entropy(g.param(m), labels); }, {&m}},
  };
  for (const Case& c : cases) {
    const auto result = finite_diff_check([&](Graph& g) { return weighted_sum(c.build(g), 3); }, c.leaves);
    EXPECT_LE(result.max_rel_error, 1e-6) << c.name;
    EXPECT_GT(result.checked, 0u) << c.name;
  }
}

TEST(GradCheck, PolynomialAndConstant) {
  Tensor x = Tensor::vector({1, 2, 3});
  x.set_requires_grad(true);
  {
    Graph g;
    Var v = g.param(x);
    g.backward(sum(mul(v, v)));
    EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{2, 4, 6}));
    x.zero_grad();
  }
  Tensor* leaves[] = {&x};
  EXPECT_LE(finite_diff_check([&](Graph& g) {
              Var v = g.param(x);
              return sum(mul(v, v));
            }, leaves).max_rel_error,
            1e-8);

  const auto flat = finite_diff_check([&](Graph& g) {
    g.param(x);
    return g.constant(Tensor::scalar(4.0));
  }, leaves);
  EXPECT_EQ(flat.max_rel_error, 0.0);
}

TEST(Graph, SecondBackwardAccumulatesTwice) {
  Rng rng(4);
  Tensor a = random_tensor({3, 3}, rng), b = random_tensor({3, 2}, rng);
  a.set_requires_grad(true);
  Graph g;
  Var out = sum(gelu(matmul(g.param(a), g.constant(b))));
  g.backward(out);
  const std::vector<double> once(a.grad().begin(), a.grad().end());
  g.backward(out);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_DOUBLE_EQ(a.grad()[i], 2.0 * once[i]);
}

TEST(Graph, NonFiniteValuesAreRejected) {
  Graph g;
  Tensor bad = Tensor::vector({1.0, std::numeric_limits<double>::quiet_NaN()});
  try {
    g.constant(bad);
    FAIL() << "expected NonFinite";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
  }
}

TEST(Graph, ConstantsReceiveNoGradient) {
  Tensor w = Tensor::vector({1.0, 2.0});
  w.set_requires_grad(true);
  Graph g;
  Var x = g.constant(Tensor::vector({3.0, 4.0}));
  Var out = sum(mul(x, g.param(w)));
  g.backward(out);
  EXPECT_TRUE(g.grad(x).empty());
  EXPECT_DOUBLE_EQ(w.grad()[0], 3.0);
}
