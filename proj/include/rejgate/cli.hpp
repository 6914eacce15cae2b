#pragma once

#include <span>
#include <string>
#include <vector>

#include "rejgate/model.hpp"
#include "rejgate/stats.hpp"

namespace rejgate::cli {

// One evaluated rejection level: accepted-set MAE with its bootstrap interval,
// plus how much the level rejected. Levels are applied as-is, never refit.
struct LevelEvaluation {
  RejectionLevel level;
  IntervalEstimate mae;
  double rejected_fraction = 0.0;
  int n_accepted = 0;
  int n_rejected = 0;
};

LevelEvaluation evaluate_level(std::span<const ImageRecord> images, const RejectionLevel& level,
                               const BootstrapConfig& cfg,
                               EmptyMedianPolicy policy = EmptyMedianPolicy::zero);

// Entry point shared by the binary and the tests. `args` excludes the program
// name. Returns the process exit code: 0 ok, 1 usage, 2 validation,
// 3 degenerate computation.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace rejgate::cli
