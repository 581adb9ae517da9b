#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace specband {

struct GradCaseResult {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

struct GradSuiteReport {
  std::vector<GradCaseResult> cases;
  double max_rel_error = 0.0;
};

/// Central-difference check of every differentiable op, the band-selection and
/// fusion modules, and a full one-block toy network (2 classes, 6 bands,
/// 5x5 patches) under cross-entropy, over every parameter group.
GradSuiteReport gradient_suite(std::uint64_t seed = 0);

}  // namespace specband
