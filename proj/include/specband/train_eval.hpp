#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "specband/model.hpp"

namespace specband {

enum class Optimizer { Sgd, Adam };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& name);

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  /// Where to write a checkpoint of the current state if the loss diverges.
  std::filesystem::path divergence_dump;

  void validate() const;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Mini-batch training with softmax cross-entropy on the selected patches
/// (all when `indices` is empty). Batches are drawn from a seeded shuffle
/// each epoch. Throws DivergedLoss on a non-finite loss, value or gradient.
TrainResult train(ModelParams& params, const PatchSet& patches, std::span<const std::size_t> indices,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// "epoch,mean_loss" rows, epochs counted from 1.
std::string loss_csv(const TrainResult& result);

struct EvalReport {
  std::vector<std::vector<long>> confusion;  // rows = truth, columns = prediction
  std::size_t total = 0;
  double oa = 0.0;
  double aa = 0.0;
  double kappa = 0.0;
  std::vector<double> per_class;  // recall per class, NaN for classes absent from the truth
  bool missing_class = false;     // some class never appears in the truth
};

/// Metrics from a confusion matrix. AA averages the recalls of the classes
/// that occur in the truth. When chance agreement is total (p_e = 1, a single
/// class on both sides) Kappa is reported as 1.
EvalReport report_from_confusion(std::vector<std::vector<long>> confusion);

/// truth and predicted hold class ids 1..classes.
EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted, int classes);

/// Class id 1..C of each logits row (first maximum wins).
std::vector<int> argmax_classes(const Tensor& logits);

EvalReport evaluate(ModelParams& params, const PatchSet& patches, std::span<const std::size_t> indices = {},
                    unsigned threads = 1, std::vector<int>* predictions = nullptr);

/// JSON with confusion, oa, aa, kappa, per_class (null for absent classes).
std::string to_json(const EvalReport& report);

struct RedundancyReport {
  double acc = 0.0;
  double mi = 0.0;
  std::size_t bands = 0;
  std::size_t constant_bands = 0;  // excluded from ACC
};

/// Mean |Pearson r| over all pairs of non-constant columns of an n x c
/// row-major matrix. Throws DegenerateInput with fewer than two varying
/// columns or n < 2. `constant_columns` receives the excluded count.
double redundancy_acc(std::span<const double> features, std::size_t n, std::size_t c,
                      std::size_t* constant_columns = nullptr);

inline constexpr std::size_t kMiBins = 16;

/// Mean over columns of MI(column; label) in nats, each column cut into 16
/// equal-frequency bins (tied values share the bin of their first rank).
double redundancy_mi(std::span<const double> features, std::size_t n, std::size_t c, std::span<const int> labels);

RedundancyReport redundancy(std::span<const double> features, std::size_t n, std::size_t c,
                            std::span<const int> labels);

/// Columns `bands` of an n x c matrix.
std::vector<double> select_columns(std::span<const double> features, std::size_t n, std::size_t c,
                                   std::span<const std::size_t> bands);

}  // namespace specband
