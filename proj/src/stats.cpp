#include "rejgate/stats.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rejgate/errors.hpp"
#include "rejgate/rng.hpp"

namespace rejgate {
namespace {

void check_config(const BootstrapConfig& cfg) {
  if (cfg.resamples < 1) throw std::invalid_argument("bootstrap resamples must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw std::invalid_argument("bootstrap alpha must lie in (0, 1)");
  }
}

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

// Linearly interpolated empirical quantile over an ascending sample.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

IntervalEstimate percentile_interval(double point, std::vector<double>& stats, double alpha) {
  std::sort(stats.begin(), stats.end());
  return {point, sorted_quantile(stats, alpha / 2.0), sorted_quantile(stats, 1.0 - alpha / 2.0)};
}

void resample_into(std::span<const double> source, std::vector<double>& out,
                   std::mt19937_64& rng) {
  out.resize(source.size());
  for (double& v : out) v = source[bounded_index(rng, source.size())];
}

// Pair statistic over a pre-sorted rejected partition. Accumulates twice the
// pair score as an integer, so the result matches exhaustive enumeration
// exactly even under heavy ties.
double effect_size_sorted(std::span<const double> accepted,
                          std::span<const double> rejected_sorted) {
  std::uint64_t twice_score = 0;
  for (double a : accepted) {
    const auto lo = std::lower_bound(rejected_sorted.begin(), rejected_sorted.end(), a);
    const auto hi = std::upper_bound(lo, rejected_sorted.end(), a);
    const auto greater = static_cast<std::uint64_t>(rejected_sorted.end() - hi);
    const auto ties = static_cast<std::uint64_t>(hi - lo);
    twice_score += 2 * greater + ties;
  }
  return static_cast<double>(twice_score) /
         (2.0 * static_cast<double>(accepted.size()) * static_cast<double>(rejected_sorted.size()));
}

}  // namespace

double mean_absolute_error(std::span<const double> errors) {
  if (errors.empty()) throw DegenerateError("mean absolute error over an empty set");
  return mean_of(errors);
}

IntervalEstimate bootstrap_mean_ci(std::span<const double> values, const BootstrapConfig& cfg) {
  check_config(cfg);
  if (values.empty()) throw DegenerateError("bootstrap mean over an empty set");
  std::vector<double> stats(static_cast<std::size_t>(cfg.resamples));
  std::vector<double> draw;
  for (int i = 0; i < cfg.resamples; ++i) {
    auto rng = seeded_engine(cfg.seed, static_cast<std::uint64_t>(i));
    resample_into(values, draw, rng);
    stats[static_cast<std::size_t>(i)] = mean_of(draw);
  }
  return percentile_interval(mean_of(values), stats, cfg.alpha);
}

double common_language_effect_size(std::span<const double> accepted,
                                   std::span<const double> rejected) {
  if (accepted.empty() || rejected.empty()) {
    throw DegenerateError("effect size requires both partitions to be non-empty");
  }
  std::vector<double> sorted(rejected.begin(), rejected.end());
  std::sort(sorted.begin(), sorted.end());
  return effect_size_sorted(accepted, sorted);
}

IntervalEstimate bootstrap_effect_size_ci(std::span<const double> accepted,
                                          std::span<const double> rejected,
                                          const BootstrapConfig& cfg) {
  check_config(cfg);
  const double point = common_language_effect_size(accepted, rejected);
  std::vector<double> stats(static_cast<std::size_t>(cfg.resamples));
  std::vector<double> draw_a;
  std::vector<double> draw_r;
  for (int i = 0; i < cfg.resamples; ++i) {
    auto rng = seeded_engine(cfg.seed, static_cast<std::uint64_t>(i));
    resample_into(accepted, draw_a, rng);
    resample_into(rejected, draw_r, rng);
    std::sort(draw_r.begin(), draw_r.end());
    stats[static_cast<std::size_t>(i)] = effect_size_sorted(draw_a, draw_r);
  }
  return percentile_interval(point, stats, cfg.alpha);
}

}  // namespace rejgate
