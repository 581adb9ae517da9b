#include "specband/train_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "specband/error.hpp"
#include "specband/ops.hpp"

namespace specband {
namespace {

using json = nlohmann::ordered_json;

struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::size_t step = 0;
};

void apply_update(ParamList& list, const TrainConfig& cfg, AdamState& state) {
  if (cfg.optimizer == Optimizer::Sgd) {
    for (auto& [name, t] : list) {
      auto g = t->grad();
      auto& data = t->storage();
      for (std::size_t i = 0; i < data.size(); ++i) data[i] -= cfg.learning_rate * g[i];
    }
    return;
  }
  if (state.m.empty()) {
    for (auto& [name, t] : list) {
      state.m.emplace_back(t->size(), 0.0);
      state.v.emplace_back(t->size(), 0.0);
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < list.size(); ++p) {
    Tensor& t = *list[p].second;
    auto g = t.grad();
    auto& data = t.storage();
    auto& m = state.m[p];
    auto& v = state.v[p];
    for (std::size_t i = 0; i < data.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      data[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
    }
  }
}

[[noreturn]] void diverged(ModelParams& params, const TrainConfig& cfg, std::size_t epoch, const std::string& why) {
  std::string msg = "training diverged in epoch " + std::to_string(epoch + 1) + ": " + why;
  if (!cfg.divergence_dump.empty()) {
    try {
      save_checkpoint(params, cfg.divergence_dump, R"({"diverged": true})");
      msg += " (state written to " + cfg.divergence_dump.string() + ")";
    } catch (const std::exception& e) {
      msg += std::string(" (state dump failed: ") + e.what() + ")";
    }
  }
  fail(ErrorKind::DivergedLoss, msg);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Optimizer o) { return o == Optimizer::Sgd ? "sgd" : "adam"; }

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "sgd") return Optimizer::Sgd;
  if (name == "adam") return Optimizer::Adam;
  fail(ErrorKind::InvalidArgument, "unknown optimizer '" + name + "' (sgd|adam)");
}

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorKind::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorKind::InvalidArgument, "batch size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::InvalidArgument, "learning rate must be finite and >= 0");
  }
}

TrainResult train(ModelParams& params, const PatchSet& patches, std::span<const std::size_t> indices,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (params.config.num_classes < 2) fail(ErrorKind::InvalidArgument, "training needs at least two classes");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  if (indices.empty()) {
    order.resize(patches.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  if (order.empty()) fail(ErrorKind::InsufficientSamples, "training set is empty");
  for (std::size_t i : order) {
    if (i >= patches.size()) fail(ErrorKind::IndexOutOfRange, "training index " + std::to_string(i));
    const int label = patches.patches[i].label;
    if (label < 1 || label > params.config.num_classes) {
      fail(ErrorKind::InvalidArgument, "label " + std::to_string(label) + " outside 1.." +
                                           std::to_string(params.config.num_classes));
    }
  }

  // Frozen tensors (no gradient slot) are left untouched.
  ParamList list;
  for (auto& entry : params.list()) {
    if (entry.second->requires_grad()) list.push_back(entry);
  }
  AdamState state;
  Rng rng(config.seed);
  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      for (auto& [name, t] : list) t->zero_grad();
      try {
        for (std::size_t i = start; i < end; ++i) {
          const Patch& patch = patches.patches[order[i]];
          Graph g;
          const int target = patch.label - 1;
          Var loss = cross_entropy(forward(g, patch, params).logits, std::span<const int>(&target, 1));
          const double value = loss.value()[0];
          if (!std::isfinite(value)) diverged(params, config, epoch, "non-finite loss");
          loss_sum += value;
          g.backward(loss, weight);
        }
        for (auto& [name, t] : list) {
          for (double v : t->grad()) {
            if (!std::isfinite(v)) fail(ErrorKind::NonFiniteGradient, "gradient of " + name);
          }
        }
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::NonFinite || e.kind() == ErrorKind::NonFiniteGradient) {
          diverged(params, config, epoch, e.what());
        }
        throw;
      }
      apply_update(list, config, state);
    }
    const double mean = loss_sum / static_cast<double>(order.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

std::string loss_csv(const TrainResult& result) {
  std::string out = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_double(result.epoch_loss[e]) + "\n";
  }
  return out;
}

EvalReport report_from_confusion(std::vector<std::vector<long>> confusion) {
  const std::size_t c = confusion.size();
  EvalReport r;
  long total = 0, diag = 0;
  std::vector<long> row(c, 0), col(c, 0);
  for (std::size_t i = 0; i < c; ++i) {
    if (confusion[i].size() != c) fail(ErrorKind::ShapeMismatch, "confusion matrix is not square");
    for (std::size_t j = 0; j < c; ++j) {
      const long v = confusion[i][j];
      if (v < 0) fail(ErrorKind::InvalidArgument, "negative confusion count");
      total += v;
      row[i] += v;
      col[j] += v;
      if (i == j) diag += v;
    }
  }
  if (total == 0) fail(ErrorKind::EmptyTestSet, "no samples to evaluate");
  r.total = static_cast<std::size_t>(total);
  const double n = static_cast<double>(total);
  r.oa = static_cast<double>(diag) / n;
  r.per_class.assign(c, std::numeric_limits<double>::quiet_NaN());
  double recall_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (row[i] == 0) {
      r.missing_class = true;
      continue;
    }
    r.per_class[i] = static_cast<double>(confusion[i][i]) / static_cast<double>(row[i]);
    recall_sum += r.per_class[i];
    ++present;
  }
  r.aa = recall_sum / static_cast<double>(present);
  double pe = 0.0;
  for (std::size_t i = 0; i < c; ++i) pe += (static_cast<double>(row[i]) / n) * (static_cast<double>(col[i]) / n);
  r.kappa = pe >= 1.0 ? 1.0 : (r.oa - pe) / (1.0 - pe);
  r.confusion = std::move(confusion);
  return r;
}

EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted, int classes) {
  if (truth.size() != predicted.size()) fail(ErrorKind::ShapeMismatch, "truth and prediction counts differ");
  if (truth.empty()) fail(ErrorKind::EmptyTestSet, "no samples to evaluate");
  const auto c = static_cast<std::size_t>(classes);
  std::vector<std::vector<long>> confusion(c, std::vector<long>(c, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 1 || truth[i] > classes || predicted[i] < 1 || predicted[i] > classes) {
      fail(ErrorKind::InvalidArgument, "class id outside 1.." + std::to_string(classes));
    }
    ++confusion[static_cast<std::size_t>(truth[i] - 1)][static_cast<std::size_t>(predicted[i] - 1)];
  }
  return report_from_confusion(std::move(confusion));
}

std::vector<int> argmax_classes(const Tensor& logits) {
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  std::vector<int> out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < cols; ++j) {
      if (logits.at(i, j) > logits.at(i, best)) best = j;
    }
    out[i] = static_cast<int>(best) + 1;
  }
  return out;
}

EvalReport evaluate(ModelParams& params, const PatchSet& patches, std::span<const std::size_t> indices,
                    unsigned threads, std::vector<int>* predictions) {
  if (patches.size() == 0 || (indices.empty() && patches.size() == 0)) fail(ErrorKind::EmptyTestSet, "no test patches");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  if (indices.empty()) {
    order.resize(patches.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  const std::vector<int> predicted = argmax_classes(predict_logits(params, patches, order, threads));
  std::vector<int> truth(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) truth[i] = patches.patches[order[i]].label;
  if (predictions) *predictions = predicted;
  return evaluate_predictions(truth, predicted, params.config.num_classes);
}

std::string to_json(const EvalReport& r) {
  json j;
  j["total"] = r.total;
  j["oa"] = r.oa;
  j["aa"] = r.aa;
  j["kappa"] = r.kappa;
  j["per_class"] = json::array();
  for (double v : r.per_class) {
    if (std::isnan(v)) {
      j["per_class"].push_back(nullptr);
    } else {
      j["per_class"].push_back(v);
    }
  }
  j["missing_class"] = r.missing_class;
  j["confusion"] = r.confusion;
  return j.dump(2);
}

double redundancy_acc(std::span<const double> features, std::size_t n, std::size_t c, std::size_t* constant_columns) {
  if (features.size() != n * c) fail(ErrorKind::ShapeMismatch, "feature matrix is not n x c");
  if (n < 2) fail(ErrorKind::DegenerateInput, "ACC needs at least two samples");
  std::vector<std::vector<double>> centered;
  std::vector<double> norms;
  std::size_t constant = 0;
  for (std::size_t b = 0; b < c; ++b) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += features[i * c + b];
    mean /= static_cast<double>(n);
    std::vector<double> col(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = features[i * c + b] - mean;
      ss += col[i] * col[i];
    }
    if (!(ss > 1e-24 * std::max(1.0, mean * mean) * static_cast<double>(n))) {
      ++constant;
      continue;
    }
    centered.push_back(std::move(col));
    norms.push_back(std::sqrt(ss));
  }
  if (constant_columns) *constant_columns = constant;
  if (centered.size() < 2) fail(ErrorKind::DegenerateInput, "ACC needs at least two non-constant bands");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < centered.size(); ++a) {
    for (std::size_t b = a + 1; b < centered.size(); ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += centered[a][i] * centered[b][i];
      total += std::min(1.0, std::abs(dot) / (norms[a] * norms[b]));
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double redundancy_mi(std::span<const double> features, std::size_t n, std::size_t c, std::span<const int> labels) {
  if (features.size() != n * c) fail(ErrorKind::ShapeMismatch, "feature matrix is not n x c");
  if (labels.size() != n) fail(ErrorKind::ShapeMismatch, "label count does not match samples");
  if (n < kMiBins) fail(ErrorKind::DegenerateInput, "MI needs at least " + std::to_string(kMiBins) + " samples");
  if (c == 0) fail(ErrorKind::DegenerateInput, "MI needs at least one band");

  std::map<int, std::size_t> dense;
  for (int l : labels) dense.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, id] : dense) id = next++;
  const std::size_t classes = dense.size();
  std::vector<std::size_t> label_id(n);
  std::vector<double> p_label(classes, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    label_id[i] = dense[labels[i]];
    p_label[label_id[i]] += 1.0 / static_cast<double>(n);
  }

  double total = 0.0;
  std::vector<std::size_t> order(n), bin(n);
  for (std::size_t b = 0; b < c; ++b) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return features[x * c + b] < features[y * c + b]; });
    std::size_t first_rank = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (r > 0 && features[order[r] * c + b] != features[order[r - 1] * c + b]) first_rank = r;
      bin[order[r]] = first_rank * kMiBins / n;
    }
    std::vector<double> joint(kMiBins * classes, 0.0), p_bin(kMiBins, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      joint[bin[i] * classes + label_id[i]] += 1.0 / static_cast<double>(n);
      p_bin[bin[i]] += 1.0 / static_cast<double>(n);
    }
    double mi = 0.0;
    for (std::size_t k = 0; k < kMiBins; ++k)
      for (std::size_t l = 0; l < classes; ++l) {
        const double pj = joint[k * classes + l];
        if (pj > 0.0) mi += pj * std::log(pj / (p_bin[k] * p_label[l]));
      }
    total += std::max(0.0, mi);
  }
  return total / static_cast<double>(c);
}

RedundancyReport redundancy(std::span<const double> features, std::size_t n, std::size_t c,
                            std::span<const int> labels) {
  RedundancyReport r;
  r.bands = c;
  r.acc = redundancy_acc(features, n, c, &r.constant_bands);
  r.mi = redundancy_mi(features, n, c, labels);
  return r;
}

std::vector<double> select_columns(std::span<const double> features, std::size_t n, std::size_t c,
                                   std::span<const std::size_t> bands) {
  if (features.size() != n * c) fail(ErrorKind::ShapeMismatch, "feature matrix is not n x c");
  std::vector<double> out(n * bands.size());
  for (std::size_t j = 0; j < bands.size(); ++j) {
    if (bands[j] >= c) fail(ErrorKind::IndexOutOfRange, "band " + std::to_string(bands[j]));
    for (std::size_t i = 0; i < n; ++i) out[i * bands.size() + j] = features[i * c + bands[j]];
  }
  return out;
}

}  // namespace specband
