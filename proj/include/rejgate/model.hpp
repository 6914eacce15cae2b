#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace rejgate {

// Season label of the form <S|K><two-digit year>, e.g. "S20" or "K19".
// Total order: by year, with the summer season (S) before kharif (K).
struct SeasonId {
  char season_type = 'S';  // 'S' or 'K'
  int year = 0;            // two-digit year

  static SeasonId parse(std::string_view label);
  std::string label() const;

  int rank() const { return year * 2 + (season_type == 'K' ? 1 : 0); }

  friend bool operator==(const SeasonId& a, const SeasonId& b) { return a.rank() == b.rank(); }
  friend std::strong_ordering operator<=>(const SeasonId& a, const SeasonId& b) {
    return a.rank() <=> b.rank();
  }
};

// One trap photo: the detector's box confidences plus the annotated count.
struct ImageRecord {
  std::string image_id;
  SeasonId season;
  std::vector<double> scores;  // box confidences, each in [0, 1]; may be empty
  int gt_count = 0;            // annotated pest count, >= 0

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

enum class LevelKind { absolute, relative, global };

std::string_view to_string(LevelKind kind);

// The rejection level two-tuple: a box-confidence floor plus a cutoff on the
// median of the surviving box confidences.
struct RejectionLevel {
  double conf_threshold = 0.0;
  double median_threshold = 0.0;
  LevelKind kind = LevelKind::absolute;
};

struct GateDecision {
  bool accepted = false;
  int surviving_count = 0;
  double survivor_median = 0.0;
};

// Median assigned to an image with no surviving boxes. `zero` rejects such
// images whenever the cutoff is positive; `one` always accepts them (with a
// predicted count of 0).
enum class EmptyMedianPolicy { zero, one };

// Scores >= threshold (inclusive), sorted ascending.
std::vector<double> surviving_scores(const ImageRecord& image, double threshold);

// Number of boxes kept at the threshold; this is the predicted count.
int predicted_count(const ImageRecord& image, double threshold);

// |predicted count - annotated count|.
int absolute_error(const ImageRecord& image, double threshold);

// Sample median of the surviving scores (mean of the middle two for even
// lengths); empty survivor sets follow `policy`.
double survivor_median(const ImageRecord& image, double threshold,
                       EmptyMedianPolicy policy = EmptyMedianPolicy::zero);

// Accept iff the survivor median reaches the level's median cutoff.
GateDecision gate(const ImageRecord& image, const RejectionLevel& level,
                  EmptyMedianPolicy policy = EmptyMedianPolicy::zero);

}  // namespace rejgate
