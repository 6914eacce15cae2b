#include "rejgate/calibration.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rejgate/errors.hpp"
#include "rejgate/parallel.hpp"
#include "rejgate/rng.hpp"

namespace rejgate {
namespace {

void check_grid(std::span<const double> grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + " grid must be non-empty");
  double prev = -1.0;
  for (double value : grid) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw std::invalid_argument(std::string(what) + " grid values must lie in [0, 1]");
    }
    if (value <= prev) {
      throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
    }
    prev = value;
  }
}

const MedianSweepPoint* find_point(std::span<const MedianSweepPoint> points, double median) {
  for (const auto& point : points) {
    if (point.median == median) return &point;
  }
  return nullptr;
}

}  // namespace

std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw UsageError("grid step must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) {
    double value = step * static_cast<double>(i);
    if (value > 1.0) value = 1.0;
    grid.push_back(value);
  }
  return grid;
}

std::vector<SweepPoint> sweep_confidence(std::span<const ImageRecord> images,
                                         std::span<const double> grid, const BootstrapConfig& cfg,
                                         unsigned threads) {
  if (images.empty()) throw ValidationError("confidence sweep over an empty dataset");
  check_grid(grid, "confidence");
  std::vector<SweepPoint> points(grid.size());
  parallel_for(grid.size(), resolve_threads(threads), [&](std::size_t i) {
    const double threshold = grid[i];
    std::vector<double> errors;
    errors.reserve(images.size());
    for (const ImageRecord& image : images) {
      errors.push_back(static_cast<double>(absolute_error(image, threshold)));
    }
    BootstrapConfig point_cfg = cfg;
    point_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
    points[i] = {threshold, bootstrap_mean_ci(errors, point_cfg),
                 static_cast<int>(images.size())};
  });
  return points;
}

double optimal_confidence(std::span<const SweepPoint> sweep) {
  if (sweep.empty()) throw std::invalid_argument("optimal_confidence over an empty sweep");
  const SweepPoint* best = &sweep.front();
  for (const SweepPoint& point : sweep.subspan(1)) {
    if (point.mae.point < best->mae.point) best = &point;  // ties keep the smaller threshold
  }
  return best->threshold;
}

std::vector<MedianSweepPoint> sweep_median(std::span<const ImageRecord> images,
                                           double conf_threshold, std::span<const double> grid,
                                           const BootstrapConfig& cfg, EmptyMedianPolicy policy,
                                           unsigned threads) {
  if (images.empty()) throw ValidationError("median sweep over an empty dataset");
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
    throw std::invalid_argument("confidence threshold must lie in [0, 1]");
  }
  check_grid(grid, "median");

  // Medians and errors do not vary with the cutoff, so compute them once.
  const std::size_t n = images.size();
  std::vector<double> medians(n);
  std::vector<double> errors(n);
  for (std::size_t i = 0; i < n; ++i) {
    medians[i] = survivor_median(images[i], conf_threshold, policy);
    errors[i] = static_cast<double>(absolute_error(images[i], conf_threshold));
  }

  std::vector<MedianSweepPoint> points(grid.size());
  parallel_for(grid.size(), resolve_threads(threads), [&](std::size_t i) {
    const double cutoff = grid[i];
    std::vector<double> accepted;
    std::vector<double> rejected;
    for (std::size_t k = 0; k < n; ++k) {
      (medians[k] >= cutoff ? accepted : rejected).push_back(errors[k]);
    }
    MedianSweepPoint point;
    point.median = cutoff;
    point.n_accepted = static_cast<int>(accepted.size());
    point.n_rejected = static_cast<int>(rejected.size());
    point.rejected_fraction = static_cast<double>(rejected.size()) / static_cast<double>(n);
    if (!accepted.empty() && !rejected.empty()) {
      BootstrapConfig point_cfg = cfg;
      point_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
      point.effect = bootstrap_effect_size_ci(accepted, rejected, point_cfg);
    }
    points[i] = std::move(point);
  });
  return points;
}

RejectionLevel select_absolute(std::span<const MedianSweepPoint> points, double conf_threshold) {
  const MedianSweepPoint* best = nullptr;
  for (const MedianSweepPoint& point : points) {
    if (!point.effect) continue;
    if (best == nullptr || point.effect->point > best->effect->point) best = &point;
  }
  if (best == nullptr) {
    throw DegenerateError(
        "calibration failed: every median cutoff left one partition empty");
  }
  return {conf_threshold, best->median, LevelKind::absolute};
}

RejectionLevel select_relative(std::span<const MedianSweepPoint> points,
                               const RejectionLevel& absolute) {
  const MedianSweepPoint* anchor = find_point(points, absolute.median_threshold);
  if (anchor == nullptr || !anchor->effect) {
    throw std::invalid_argument("absolute level does not match the supplied sweep");
  }
  const double target = anchor->effect->point;
  const MedianSweepPoint* best = nullptr;
  for (const MedianSweepPoint& point : points) {
    if (!point.effect || point.effect->hi < target) continue;
    if (best == nullptr || point.rejected_fraction < best->rejected_fraction) best = &point;
  }
  // `anchor` qualifies (hi >= point), so `best` is never null.
  return {absolute.conf_threshold, best->median, LevelKind::relative};
}

CalibrationReport calibrate(std::span<const ImageRecord> images, const CalibrationConfig& cfg) {
  if (images.empty()) throw ValidationError("calibration over an empty dataset");
  double conf = 0.0;
  if (cfg.conf_threshold) {
    conf = *cfg.conf_threshold;
    if (!(conf >= 0.0 && conf <= 1.0)) {
      throw UsageError("confidence threshold must lie in [0, 1]");
    }
  } else {
    conf = optimal_confidence(
        sweep_confidence(images, cfg.conf_grid, cfg.bootstrap, cfg.threads));
  }

  CalibrationReport report;
  report.conf_threshold = conf;
  report.median_sweep =
      sweep_median(images, conf, cfg.median_grid, cfg.bootstrap, cfg.empty_median, cfg.threads);
  report.absolute = select_absolute(report.median_sweep, conf);
  report.relative = select_relative(report.median_sweep, report.absolute);
  report.is_global = report.absolute.median_threshold == report.relative.median_threshold;
  if (report.is_global) {
    report.absolute.kind = LevelKind::global;
    report.relative.kind = LevelKind::global;
  }
  return report;
}

}  // namespace rejgate
