#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "../support/kbsm_properties.hpp"
#include "specband/dataio.hpp"
#include "specband/error.hpp"
#include "specband/gradcheck.hpp"
#include "specband/kbsm.hpp"
#include "specband/ops.hpp"
#include "specband/preprocess.hpp"

using namespace specband;
using props::random_matrix;

namespace {

void zero(Tensor& t) { std::fill(t.storage().begin(), t.storage().end(), 0.0); }

double gelu_ref(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

}  // namespace

TEST(AttentionMap, OnesColumnGivesBandSums) {
  Rng rng(1);
  const Tensor x = random_matrix(rng, 9, 4);
  Graph g;
  const Var a = attention_map(g.constant(x), g.constant(Tensor({9, 1}, 1.0)));
  ASSERT_EQ(a.shape(), (Shape{4, 1}));
  for (std::size_t b = 0; b < 4; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 9; ++i) s += x.at(i, b);
    EXPECT_NEAR(a.value()[b], s, 1e-12);
  }
}

TEST(AttentionMap, OrthogonalBandsGiveSingleRow) {
  Tensor x({4, 3});
  x.at(0, 0) = 1;
  x.at(1, 1) = 2;
  x.at(2, 2) = 3;
  Tensor z({4, 1});
  z.at(1, 0) = 2;  // band 1's column
  Graph g;
  const Var a = attention_map(g.constant(x), g.constant(z));
  EXPECT_EQ(a.value().storage(), (std::vector<double>{0, 4, 0}));
}

TEST(AttentionMap, BenchmarkShape) {
  Graph g;
  const Var a = attention_map(g.constant(Tensor({121, 180}, 0.1)), g.constant(Tensor({121, 64}, 0.1)));
  EXPECT_EQ(a.shape(), (Shape{180, 64}));
  Graph h;
  EXPECT_THROW(attention_map(h.constant(Tensor({121, 180})), h.constant(Tensor({120, 64}))), Error);
}

TEST(ScoreBands, ZeroGateGivesHalf) {
  Rng rng(2);
  KbsmParams p = KbsmParams::init(9, 3, rng);
  zero(p.gate_w1);
  zero(p.gate_w2);
  const Tensor x = random_matrix(rng, 9, 5), z = random_matrix(rng, 9, 3);
  Graph g;
  const Var xv = g.constant(x);
  const BandScore s = score_bands(attention_map(xv, g.constant(z)), xv, p);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(s.g.value()[i], 0.5);
    EXPECT_EQ(s.weighted.value()[i], 0.5 * s.v.value()[i]);
  }
}

TEST(ScoreBands, ZeroAggregationGivesBias) {
  Rng rng(3);
  KbsmParams p = KbsmParams::init(4, 2, rng);
  zero(p.agg_w);
  p.agg_b[0] = 0.75;
  const Tensor x = random_matrix(rng, 4, 6), z = random_matrix(rng, 4, 2);
  Graph g;
  const Var xv = g.constant(x);
  const BandScore s = score_bands(attention_map(xv, g.constant(z)), xv, p);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(s.v.value()[i], 0.75);
}

TEST(ScoreBands, MatchesDirectRecomputation) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t hw = 9, c = 7, kf = 3, hidden = gate_hidden_width(hw);
    KbsmParams p = KbsmParams::init(hw, kf, rng);
    for (double& v : p.gate_b1.storage()) v = rng.normal(0.0, 0.3);
    p.gate_b2[0] = rng.normal();
    const Tensor x = random_matrix(rng, hw, c), z = random_matrix(rng, hw, kf);
    Graph g;
    const Var xv = g.constant(x);
    const BandScore s = score_bands(attention_map(xv, g.constant(z)), xv, p);
    for (std::size_t b = 0; b < c; ++b) {
      double v = p.agg_b[0];
      for (std::size_t f = 0; f < kf; ++f) {
        double a = 0.0;
        for (std::size_t i = 0; i < hw; ++i) a += x.at(i, b) * z.at(i, f);
        v += a * p.agg_w[f];
      }
      double logit = p.gate_b2[0];
      for (std::size_t h = 0; h < hidden; ++h) {
        double pre = p.gate_b1[h];
        for (std::size_t i = 0; i < hw; ++i) pre += x.at(i, b) * p.gate_w1.at(i, h);
        logit += gelu_ref(pre) * p.gate_w2[h];
      }
      const double gate = 1.0 / (1.0 + std::exp(-logit));
      EXPECT_NEAR(s.v.value()[b], v, 1e-12);
      EXPECT_NEAR(s.g.value()[b], gate, 1e-12);
      EXPECT_GT(s.g.value()[b], 0.0);
      EXPECT_LT(s.g.value()[b], 1.0);
      EXPECT_EQ(s.weighted.value()[b], s.v.value()[b] * s.g.value()[b]);
    }
  }
}

TEST(ScoreBands, ShapeErrors) {
  Rng rng(5);
  KbsmParams p = KbsmParams::init(9, 3, rng);
  Graph g;
  const Var x = g.constant(random_matrix(rng, 4, 5));
  EXPECT_THROW(score_bands(attention_map(x, g.constant(random_matrix(rng, 4, 3))), x, p), Error);
}

TEST(SelectTopk, Examples) {
  const std::vector<double> v{0.1, 0.9, 0.5};
  EXPECT_EQ(select_topk(v, 2.0 / 3.0).indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(select_topk(v, 1.0).indices, (std::vector<std::size_t>{0, 1, 2}));
  const std::vector<double> flat(5, 0.3);
  EXPECT_EQ(select_topk(flat, 0.6).indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(retained_count(0.2, 30), 6u);
  EXPECT_EQ(retained_count(0.5, 180), 90u);
  EXPECT_EQ(retained_count(0.01, 30), 1u);
  EXPECT_THROW(retained_count(0.0, 30), Error);
  EXPECT_THROW(retained_count(1.5, 30), Error);
}

TEST(GatherBands, Examples) {
  Rng rng(6);
  const Tensor x = random_matrix(rng, 4, 3);
  Graph g;
  const Var xv = g.constant(x);
  EXPECT_EQ(gather_bands(xv, select_topk(std::vector<double>{1, 1, 1}, 1.0)).value().storage(), x.storage());
  BandSelection one;
  one.indices = {2};
  one.k = 1;
  const Var col = gather_bands(xv, one);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(col.value()[i], x.at(i, 2));
  BandSelection bad;
  bad.indices = {3};
  EXPECT_THROW(gather_bands(xv, bad), Error);
}

TEST(GatherBands, SumGradientMatchesFiniteDifferences) {
  Rng rng(7);
  Tensor x = random_matrix(rng, 5, 6);
  x.set_requires_grad(true);
  BandSelection s;
  s.indices = {1, 4};
  s.k = 2;
  Graph g;
  g.backward(sum(gather_bands(g.param(x), s)));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(x.grad()[i * 6 + j], (j == 1 || j == 4) ? 1.0 : 0.0);
  Tensor* params[] = {&x};
  const auto report = finite_diff_check(
      [&](Graph& graph) { return sum(mul(gather_bands(graph.param(x), s), gather_bands(graph.param(x), s))); }, params);
  EXPECT_LE(report.max_rel_error, 1e-6);
}

TEST(KbsmForward, ShapeArithmetic) {
  Rng rng(8);
  KbsmParams p = KbsmParams::init(9, 2, rng);
  Graph g;
  const KbsmOutput out = kbsm_forward(g.constant(random_matrix(rng, 9, 4)), g.constant(random_matrix(rng, 9, 2)), p, 0.5);
  EXPECT_EQ(out.selection.k, 2u);
  EXPECT_EQ(out.selected.shape(), (Shape{9, 2}));
}

TEST(KbsmForward, OrthogonalGuideAndZeroGateFallsBackToTieRule) {
  Rng rng(9);
  KbsmParams p = KbsmParams::init(4, 1, rng);
  zero(p.gate_w1);
  zero(p.gate_w2);
  Tensor x({4, 4});
  x.at(0, 0) = 1;
  x.at(1, 1) = 1;
  x.at(0, 2) = 1;
  x.at(1, 3) = -1;
  Tensor z({4, 1});
  z.at(3, 0) = 1;  // orthogonal to every band column
  Graph g;
  const KbsmOutput out = kbsm_forward(g.constant(x), g.constant(z), p, 0.5);
  EXPECT_EQ(out.selection.indices, (std::vector<std::size_t>{0, 1}));
}

// With a gate tuned to class contrasts (sign-free via paired hidden units) the
// module picks out exactly the planted bands of a synthetic scene.
TEST(KbsmForward, RecoversPlantedBandsWithContrastGate) {
  SynthSpec spec;
  spec.height = spec.width = 24;
  const SynthScene scene = synth_generate(spec);
  const HyperCube hsi = normalize(scene.hsi);
  const std::size_t n = hsi.pixels(), c = hsi.bands, classes = 3;
  Tensor x({n, c});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < c; ++b) x.at(i, b) = hsi.values[b * n + i];

  Rng rng(10);
  KbsmParams p = KbsmParams::init(n, 1, rng);
  zero(p.agg_w);
  p.agg_b[0] = 1.0;
  zero(p.gate_w1);
  zero(p.gate_w2);
  std::vector<double> count(classes, 0.0);
  for (int l : scene.labels.labels) count[static_cast<std::size_t>(l - 1)] += 1.0;
  // Hidden units 2k and 2k+1 see +/- the class-k mean contrast of the column.
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(scene.labels.labels[i] - 1);
    for (std::size_t cls = 0; cls < classes; ++cls) {
      const double w = (cls == k ? 1.0 / count[cls] : 0.0) - 1.0 / static_cast<double>(n);
      p.gate_w1.at(i, 2 * cls) = w;
      p.gate_w1.at(i, 2 * cls + 1) = -w;
    }
  }
  for (std::size_t h = 0; h < 2 * classes; ++h) p.gate_w2[h] = 1.0;
  p.gate_b2[0] = -1.0;

  Graph g;
  const KbsmOutput out = kbsm_forward(g.constant(x), g.constant(Tensor({n, 1}, 1.0)), p, 0.2);
  EXPECT_EQ(out.selection.indices, scene.planted);
}

TEST(KbsmInvariants, Cardinality) { EXPECT_EQ(props::cardinality_violations(1000, 1), 0); }
TEST(KbsmInvariants, AffineInvariance) { EXPECT_EQ(props::affine_violations(1000, 2), 0); }
TEST(KbsmInvariants, PermutationEquivariance) { EXPECT_EQ(props::permutation_violations(1000, 3), 0); }
TEST(KbsmInvariants, GatherGradientSparsity) { EXPECT_EQ(props::gather_gradient_violations(1000, 4), 0); }
