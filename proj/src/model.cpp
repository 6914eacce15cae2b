#include "rejgate/model.hpp"

#include <algorithm>
#include <cstdlib>

#include "rejgate/errors.hpp"

namespace rejgate {

SeasonId SeasonId::parse(std::string_view label) {
  const bool shape_ok = label.size() == 3 && (label[0] == 'S' || label[0] == 'K') &&
                        label[1] >= '0' && label[1] <= '9' && label[2] >= '0' && label[2] <= '9';
  if (!shape_ok) {
    throw ValidationError("invalid season label '" + std::string(label) +
                          "' (expected S or K followed by a two-digit year, e.g. K19)");
  }
  return SeasonId{label[0], (label[1] - '0') * 10 + (label[2] - '0')};
}

std::string SeasonId::label() const {
  return {season_type, static_cast<char>('0' + year / 10), static_cast<char>('0' + year % 10)};
}

std::string_view to_string(LevelKind kind) {
  switch (kind) {
    case LevelKind::absolute:
      return "absolute";
    case LevelKind::relative:
      return "relative";
    case LevelKind::global:
      return "global";
  }
  return "absolute";
}

std::vector<double> surviving_scores(const ImageRecord& image, double threshold) {
  std::vector<double> kept;
  kept.reserve(image.scores.size());
  for (double s : image.scores) {
    if (s >= threshold) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

int predicted_count(const ImageRecord& image, double threshold) {
  return static_cast<int>(std::count_if(image.scores.begin(), image.scores.end(),
                                        [threshold](double s) { return s >= threshold; }));
}

int absolute_error(const ImageRecord& image, double threshold) {
  return std::abs(predicted_count(image, threshold) - image.gt_count);
}

double survivor_median(const ImageRecord& image, double threshold, EmptyMedianPolicy policy) {
  const std::vector<double> kept = surviving_scores(image, threshold);
  if (kept.empty()) return policy == EmptyMedianPolicy::zero ? 0.0 : 1.0;
  const std::size_t n = kept.size();
  return n % 2 == 1 ? kept[n / 2] : 0.5 * (kept[n / 2 - 1] + kept[n / 2]);
}

GateDecision gate(const ImageRecord& image, const RejectionLevel& level,
                  EmptyMedianPolicy policy) {
  GateDecision decision;
  decision.surviving_count = predicted_count(image, level.conf_threshold);
  decision.survivor_median = survivor_median(image, level.conf_threshold, policy);
  decision.accepted = decision.survivor_median >= level.median_threshold;
  return decision;
}

}  // namespace rejgate
