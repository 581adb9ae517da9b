#include "specband/gradsuite.hpp"

#include <algorithm>
#include <functional>

#include "specband/cafm.hpp"
#include "specband/gradcheck.hpp"
#include "specband/kbsm.hpp"
#include "specband/model.hpp"
#include "specband/ops.hpp"

namespace specband {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double offset = 0.0) {
  Tensor t(std::move(shape));
  for (double& v : t.storage()) v = offset + rng.normal();
  t.set_requires_grad(true);
  return t;
}

// Projects an arbitrary-shaped output onto a fixed random direction so every
// output element contributes to the checked scalar.
Var project(Var out, std::uint64_t seed) {
  Rng rng(seed);
  Tensor w(out.shape());
  for (double& v : w.storage()) v = rng.uniform(-1.0, 1.0);
  return sum(mul(out, out.graph().constant(std::move(w))));
}

struct Case {
  std::string name;
  std::function<Var(Graph&)> build;
  std::vector<Tensor*> leaves;
};

}  // namespace

GradSuiteReport gradient_suite(std::uint64_t seed) {
  Rng rng(seed);
  Tensor m = random_tensor({4, 3}, rng), n = random_tensor({4, 3}, rng), p = random_tensor({3, 2}, rng);
  Tensor row = random_tensor({4}, rng), col = random_tensor({3}, rng);
  Tensor img = random_tensor({2, 5, 5}, rng), ker = random_tensor({3, 2, 3, 3}, rng);
  Tensor vol = random_tensor({1, 4, 4, 4}, rng), ker3 = random_tensor({2, 1, 3, 3, 3}, rng);
  // Relu is checked away from its kink.
  Tensor away = random_tensor({4, 3}, rng);
  for (double& v : away.storage()) v += v >= 0 ? 0.5 : -0.5;
  const std::vector<std::size_t> cols{2, 0};
  const std::vector<int> labels{0, 2, 1, 1};

  // Module-level toys.
  KbsmParams kbsm = KbsmParams::init(9, 3, rng);
  Tensor kx = random_tensor({9, 5}, rng), kz = random_tensor({9, 3}, rng);
  CafmParams cafm = CafmParams::init(2, 2, 2, rng);
  Tensor ch = random_tensor({2, 3, 3}, rng), ca = random_tensor({2, 3, 3}, rng);

  // Full network toy.
  ModelConfig cfg;
  cfg.patch_size = 5;
  cfg.band_ratio = 0.5;
  cfg.num_blocks = 1;
  cfg.hsi_bands = 6;
  cfg.aux_bands = 2;
  cfg.reduced_bands = 2;
  cfg.width = 4;
  cfg.attention_width = 4;
  cfg.num_classes = 2;
  cfg.seed = seed + 1;
  ModelParams model = ModelParams::init(cfg);
  std::vector<Patch> batch(2);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (double& v : (batch[i].hsi = std::vector<double>(6 * 25))) v = rng.normal();
    for (double& v : (batch[i].aux = std::vector<double>(2 * 25))) v = rng.normal();
    for (double& v : (batch[i].reduced = std::vector<double>(2 * 25))) v = rng.normal();
    batch[i].label = static_cast<int>(i) + 1;
  }
  auto network_loss = [&](Graph& g) {
    std::vector<Var> logits;
    std::vector<int> targets;
    for (const Patch& patch : batch) {
      logits.push_back(forward(g, patch, model).logits);
      targets.push_back(patch.label - 1);
    }
    return cross_entropy(concat(logits), targets);
  };

  std::vector<Case> cases = {
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
      {"relu", [&](Graph& g) { return relu(g.param(away)); }, {&away}},
      {"gelu", [&](Graph& g) { return gelu(g.param(m)); }, {&m}},
      {"softmax_axis0", [&](Graph& g) { return softmax(g.param(m), 0); }, {&m}},
      {"softmax_axis1", [&](Graph& g) { return softmax(g.param(m), 1); }, {&m}},
      {"sum", [&](Graph& g) { return sum(g.param(m)); }, {&m}},
      {"mean", [&](Graph& g) { return mean(g.param(m)); }, {&m}},
      {"global_avg_pool", [&](Graph& g) { return global_avg_pool(g.param(img)); }, {&img}},
      {"concat",
       [&](Graph& g) {
         const Var parts[] = {g.param(m), g.param(n)};
         return concat(parts);
       },
       {&m, &n}},
      {"gather_columns", [&](Graph& g) { return gather_columns(g.param(m), cols); }, {&m}},
      {"gather", [&](Graph& g) { return gather(g.param(row), cols); }, {&row}},
      {"conv2d_same", [&](Graph& g) { return conv2d(g.param(img), g.param(ker), Padding::Same); }, {&img, &ker}},
      {"conv2d_valid", [&](Graph& g) { return conv2d(g.param(img), g.param(ker), Padding::Valid); }, {&img, &ker}},
      {"conv3d_same", [&](Graph& g) { return conv3d(g.param(vol), g.param(ker3), Padding::Same); }, {&vol, &ker3}},
      {"cross_entropy", [&](Graph& g) { return cross_entropy(g.param(m), labels); }, {&m}},
  };

  {
    ParamList list;
    kbsm.collect("", list);
    Case c{"kbsm_scores", [&](Graph& g) {
             const Var x = g.param(kx);
             return score_bands(attention_map(x, g.param(kz)), x, kbsm).weighted;
           },
           {&kx, &kz}};
    for (auto& [name, t] : list) c.leaves.push_back(t);
    cases.push_back(c);
    cases.push_back({"kbsm_gather", [&](Graph& g) { return kbsm_forward(g.param(kx), g.constant(kz), kbsm, 0.4).selected; },
                     {&kx}});
  }
  {
    ParamList list;
    cafm.collect("", list);
    Case c{"cafm", [&](Graph& g) { return cafm_forward(g.param(ch), g.param(ca), cafm); }, {&ch, &ca}};
    for (auto& [name, t] : list) c.leaves.push_back(t);
    cases.push_back(c);
  }

  std::vector<Case> network;
  {
    // One case per parameter group so the report shows where errors live.
    std::vector<std::pair<std::string, std::vector<Tensor*>>> groups;
    for (auto& [name, t] : model.list()) {
      const std::string group = name.substr(0, name.rfind('.'));
      if (groups.empty() || groups.back().first != group) groups.push_back({group, {}});
      groups.back().second.push_back(t);
    }
    for (auto& [group, leaves] : groups) cases.push_back({"network." + group, network_loss, leaves});
  }

  GradSuiteReport report;
  std::uint64_t salt = seed * 7919 + 17;
  for (const Case& c : cases) {
    const bool scalar_root = c.name.rfind("network.", 0) == 0;
    const std::uint64_t direction = salt++;
    const auto result = finite_diff_check(
        [&](Graph& g) { return scalar_root ? c.build(g) : project(c.build(g), direction); }, c.leaves);
    report.cases.push_back({c.name, result.max_rel_error, result.checked});
    report.max_rel_error = std::max(report.max_rel_error, result.max_rel_error);
  }
  return report;
}

}  // namespace specband
