#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rejgate/model.hpp"

namespace rejgate {

enum class OracleMode { confidence_aware, best_case };

struct OraclePoint {
  double fraction = 0.0;
  double mae = 0.0;
  int n_kept = 0;
};

struct OracleCurve {
  OracleMode mode = OracleMode::confidence_aware;
  std::optional<double> threshold;  // fixed threshold, confidence_aware only
  std::vector<OraclePoint> points;
};

// Smallest absolute error any confidence threshold can reach for this image.
// The achievable predicted counts are finite, so the exact minimum comes from
// evaluating the distinct scores plus one value above the maximum.
int best_case_ae(const ImageRecord& image);

// Same minimum restricted to a caller-supplied candidate threshold set.
int best_case_ae(const ImageRecord& image, std::span<const double> candidate_thresholds);

// Lower-bound rejector: per fraction f, drop the floor(f*n) images with the
// highest AE (ties broken by image_id) and return the MAE of the remainder.
// AEs are taken at `threshold` in confidence_aware mode, or per-image best
// case otherwise (optionally restricted to `candidate_thresholds`).
OracleCurve oracle_curve(std::span<const ImageRecord> images, OracleMode mode,
                         std::span<const double> fractions,
                         std::optional<double> threshold = std::nullopt,
                         std::span<const double> candidate_thresholds = {});

}  // namespace rejgate
