#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specband/dataio.hpp"
#include "specband/model.hpp"
#include "specband/train_eval.hpp"

namespace specband::cli {

struct InputPaths {
  std::filesystem::path hsi;
  std::filesystem::path aux;
  std::filesystem::path labels;
};

struct SynthOptions {
  SynthSpec spec;
  std::filesystem::path out;
};

struct TrainOptions {
  InputPaths inputs;
  ModelConfig model;  // hsi/aux/class counts are taken from the data
  TrainConfig train;
  /// Unset (0) means r = number of auxiliary bands.
  std::size_t reduced_bands = 0;
  std::size_t train_per_class = 60;
  /// Seed of the stratified split; defaults to the run seed.
  std::int64_t split_seed = -1;
  std::filesystem::path out;
};

enum class SplitPart { Train, Test, All };

SplitPart split_part_from_string(const std::string& name);

struct EvalOptions {
  InputPaths inputs;
  std::filesystem::path checkpoint;
  SplitPart part = SplitPart::Test;
  std::filesystem::path out;
};

struct SelectOptions {
  InputPaths inputs;
  std::filesystem::path checkpoint;
  SplitPart part = SplitPart::All;
  std::size_t block = 0;
  std::filesystem::path out;
};

struct AnalyzeOptions {
  std::filesystem::path hsi;
  std::filesystem::path labels;
  std::filesystem::path aux;         // needed with --checkpoint
  std::filesystem::path checkpoint;  // optional source of the selected set
  std::vector<std::size_t> bands;    // explicit selected set
  bool acc = false;
  bool mi = false;
  std::filesystem::path out;
};

struct GradcheckOptions {
  std::uint64_t seed = 0;
  double tolerance = 1e-4;
  std::filesystem::path out;  // optional
};

/// Each returns the process exit code; library errors propagate as Error.
int run_synth(const SynthOptions& o, const std::vector<std::string>& argv);
int run_train(TrainOptions o, const std::vector<std::string>& argv);
int run_eval(const EvalOptions& o, const std::vector<std::string>& argv);
int run_select(const SelectOptions& o, const std::vector<std::string>& argv);
int run_analyze(const AnalyzeOptions& o, const std::vector<std::string>& argv);
int run_gradcheck(const GradcheckOptions& o, const std::vector<std::string>& argv);

}  // namespace specband::cli
