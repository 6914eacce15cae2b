#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rejgate/model.hpp"
#include "rejgate/stats.hpp"

namespace rejgate {

struct SweepPoint {
  double threshold = 0.0;
  IntervalEstimate mae;
  int n_images = 0;
};

struct MedianSweepPoint {
  double median = 0.0;
  std::optional<IntervalEstimate> effect;  // absent when a partition is empty
  double rejected_fraction = 0.0;
  int n_accepted = 0;
  int n_rejected = 0;
};

struct CalibrationReport {
  double conf_threshold = 0.0;
  std::vector<MedianSweepPoint> median_sweep;
  RejectionLevel absolute;
  RejectionLevel relative;
  bool is_global = false;
};

// Inclusive grid over [0, 1] in `step` increments.
std::vector<double> threshold_grid(double step);

// MAE over every image (no gating) at each grid threshold, with a bootstrap
// interval per point. Point i's bootstrap stream derives from (cfg.seed, i).
std::vector<SweepPoint> sweep_confidence(std::span<const ImageRecord> images,
                                         std::span<const double> grid, const BootstrapConfig& cfg,
                                         unsigned threads = 1);

// Grid threshold minimising mae.point; ties go to the smallest threshold.
double optimal_confidence(std::span<const SweepPoint> sweep);

// At each grid cutoff m, split images by survivor median >= m (errors taken at
// conf_threshold) and score the split with the effect size between the two
// partitions' absolute errors. Cutoffs leaving a partition empty are emitted
// with no effect estimate.
std::vector<MedianSweepPoint> sweep_median(std::span<const ImageRecord> images,
                                           double conf_threshold, std::span<const double> grid,
                                           const BootstrapConfig& cfg,
                                           EmptyMedianPolicy policy = EmptyMedianPolicy::zero,
                                           unsigned threads = 1);

// Cutoff with the maximum effect size; ties go to the smallest median.
RejectionLevel select_absolute(std::span<const MedianSweepPoint> points, double conf_threshold);

// Among cutoffs whose effect interval upper bound reaches the absolute point
// estimate, the one rejecting the fewest images; ties go to the smallest
// median. The absolute cutoff always qualifies, so the result never rejects
// more than it does.
RejectionLevel select_relative(std::span<const MedianSweepPoint> points,
                               const RejectionLevel& absolute);

struct CalibrationConfig {
  std::optional<double> conf_threshold;  // absent: pick via the confidence sweep
  std::vector<double> conf_grid;
  std::vector<double> median_grid;
  BootstrapConfig bootstrap;
  EmptyMedianPolicy empty_median = EmptyMedianPolicy::zero;
  unsigned threads = 1;
};

// Full two-stage calibration; deterministic given cfg.bootstrap.seed.
CalibrationReport calibrate(std::span<const ImageRecord> images, const CalibrationConfig& cfg);

}  // namespace rejgate
