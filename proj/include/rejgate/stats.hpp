#pragma once

#include <cstdint>
#include <span>

namespace rejgate {

struct BootstrapConfig {
  int resamples = 1000;
  double alpha = 0.05;  // interval coverage is 1 - alpha
  std::uint64_t seed = 0;
};

struct IntervalEstimate {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const IntervalEstimate&, const IntervalEstimate&) = default;
};

// Arithmetic mean of per-image absolute errors.
double mean_absolute_error(std::span<const double> errors);

// Percentile bootstrap interval for the mean. Every resample draws
// values.size() elements with replacement; iteration i's random stream is a
// function of (cfg.seed, i) only, so the result does not depend on the order
// in which iterations run.
IntervalEstimate bootstrap_mean_ci(std::span<const double> values, const BootstrapConfig& cfg);

// Probability that a value drawn from `accepted` is smaller than one drawn
// from `rejected`, ties counted half. Rank-based internally but equal to
// exhaustive pair enumeration exactly.
double common_language_effect_size(std::span<const double> accepted,
                                   std::span<const double> rejected);

// Point estimate is the exact statistic on the full partitions; the interval
// is a percentile bootstrap where each iteration resamples both partitions
// independently, with replacement, at their original sizes.
IntervalEstimate bootstrap_effect_size_ci(std::span<const double> accepted,
                                          std::span<const double> rejected,
                                          const BootstrapConfig& cfg);

}  // namespace rejgate
