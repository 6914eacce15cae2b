#include "rejgate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "rejgate/errors.hpp"
#include "rejgate/format.hpp"

namespace rejgate {
namespace {

void check_fractions(std::span<const double> fractions) {
  if (fractions.empty()) throw UsageError("at least one rejection fraction is required");
  double prev = -1.0;
  for (double f : fractions) {
    if (!(f >= 0.0 && f < 1.0)) {
      throw UsageError("rejection fraction " + compact6(f) +
                       " is outside [0, 1) (the mean of zero kept images is undefined)");
    }
    if (f <= prev) throw UsageError("rejection fractions must be strictly increasing");
    prev = f;
  }
}

}  // namespace

int best_case_ae(const ImageRecord& image) {
  // Count 0 is always achievable via a threshold above every score.
  int best = image.gt_count;
  std::vector<double> sorted = image.scores;
  std::sort(sorted.begin(), sorted.end());
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double s = sorted[i];
    const int count = static_cast<int>(sorted.size() - i);  // survivors at threshold s
    best = std::min(best, std::abs(count - image.gt_count));
    while (i < sorted.size() && sorted[i] == s) ++i;
  }
  return best;
}

int best_case_ae(const ImageRecord& image, std::span<const double> candidate_thresholds) {
  if (candidate_thresholds.empty()) {
    throw std::invalid_argument("candidate threshold set must be non-empty");
  }
  int best = absolute_error(image, candidate_thresholds.front());
  for (double t : candidate_thresholds.subspan(1)) {
    best = std::min(best, absolute_error(image, t));
  }
  return best;
}

OracleCurve oracle_curve(std::span<const ImageRecord> images, OracleMode mode,
                         std::span<const double> fractions, std::optional<double> threshold,
                         std::span<const double> candidate_thresholds) {
  if (images.empty()) throw ValidationError("oracle curve over an empty dataset");
  check_fractions(fractions);
  if (mode == OracleMode::confidence_aware) {
    if (!threshold) {
      throw UsageError("the confidence-aware oracle requires a confidence threshold");
    }
    if (!(*threshold >= 0.0 && *threshold <= 1.0)) {
      throw UsageError("confidence threshold must lie in [0, 1]");
    }
  }

  struct Entry {
    int ae;
    const std::string* id;
  };
  const std::size_t n = images.size();
  std::vector<Entry> entries;
  entries.reserve(n);
  for (const ImageRecord& image : images) {
    const int ae = mode == OracleMode::confidence_aware
                       ? absolute_error(image, *threshold)
                       : (candidate_thresholds.empty()
                              ? best_case_ae(image)
                              : best_case_ae(image, candidate_thresholds));
    entries.push_back({ae, &image.image_id});
  }
  // Highest errors first; image_id breaks ties so the drop order is stable.
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.ae != b.ae) return a.ae > b.ae;
    return *a.id < *b.id;
  });

  std::vector<double> suffix_sum(n + 1, 0.0);
  for (std::size_t i = n; i > 0; --i) {
    suffix_sum[i - 1] = suffix_sum[i] + static_cast<double>(entries[i - 1].ae);
  }

  OracleCurve curve;
  curve.mode = mode;
  curve.threshold = mode == OracleMode::confidence_aware ? threshold : std::nullopt;
  curve.points.reserve(fractions.size());
  for (double f : fractions) {
    auto dropped = static_cast<std::size_t>(std::floor(f * static_cast<double>(n)));
    if (dropped >= n) dropped = n - 1;
    const std::size_t kept = n - dropped;
    curve.points.push_back(
        {f, suffix_sum[dropped] / static_cast<double>(kept), static_cast<int>(kept)});
  }
  return curve;
}

}  // namespace rejgate
