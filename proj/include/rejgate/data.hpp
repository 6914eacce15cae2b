#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rejgate/model.hpp"

namespace rejgate {

// Wire form of one box: the confidence score plus whatever extra fields the
// record carried (geometry and the like), kept verbatim for round trips.
struct WireBox {
  double score = 0.0;
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();

  friend bool operator==(const WireBox&, const WireBox&) = default;
};

// Wire form of ImageRecord, one JSON object per line in a dataset file.
struct DetectionRecord {
  std::string image_id;
  std::string season;
  std::vector<WireBox> boxes;
  int gt_count = 0;

  ImageRecord to_image() const;
  static DetectionRecord from_image(const ImageRecord& image);

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

// Line-delimited JSON ingestion; errors name the offending line.
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);
std::vector<ImageRecord> load_dataset(const std::filesystem::path& path);

std::string to_jsonl(std::span<const DetectionRecord> records);
std::string to_jsonl(std::span<const ImageRecord> images);
void write_dataset(const std::filesystem::path& path, std::span<const DetectionRecord> records);
void write_dataset(const std::filesystem::path& path, std::span<const ImageRecord> images);

enum class Role { train, val, test };
enum class SplitKind { historic, present_aware };

std::string_view to_string(Role role);
std::string_view to_string(SplitKind kind);
Role parse_role(std::string_view text);

struct SplitRatios {
  double dev_of_current = 0.8;  // target-season share that joins the dev pool
  double train_of_dev = 0.8;    // dev share that becomes train (rest is val)
};

using SplitAssignment = std::map<std::string, Role>;

struct SeasonalSplit {
  SeasonId target_season;
  SplitKind kind = SplitKind::historic;
  SplitAssignment assignment;
};

// Seasonal split: target-season images are shuffled (seeded) and divided into
// a dev pool and the test set; historic dev is all prior-season images,
// present-aware dev additionally includes the target dev pool. The test set
// depends only on (target images, seed), so historic and present-aware builds
// with the same seed share it. Seasons after the target are left unassigned.
SeasonalSplit build_split(std::span<const ImageRecord> images, SeasonId target, SplitKind kind,
                          SplitRatios ratios, std::uint64_t seed);

// CSV manifest `image_id,role`, rows sorted by image_id.
std::string split_to_csv(const SeasonalSplit& split);
SplitAssignment load_split_manifest(const std::filesystem::path& path);

// Images whose id carries `role` in the assignment; order follows `images`.
std::vector<ImageRecord> select_role(std::span<const ImageRecord> images,
                                     const SplitAssignment& assignment, Role role);

// ---- synthetic datasets ----

struct Distribution {
  enum class Kind { uniform, beta, poisson, constant };
  Kind kind = Kind::constant;
  double a = 0.0;  // uniform lo / beta alpha / poisson mean / constant value
  double b = 0.0;  // uniform hi / beta beta

  static Distribution from_json(const nlohmann::json& spec, const std::string& context);
};

struct PopulationConfig {
  std::string name;
  int image_count = 0;
  std::string season;
  Distribution gt_count;
  Distribution true_score;
  Distribution spurious_count;
  Distribution spurious_score;
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  std::vector<PopulationConfig> populations;

  static GeneratorConfig from_json(const nlohmann::json& doc);
  static GeneratorConfig load(const std::filesystem::path& path);
};

// Deterministic given cfg.seed. Per image: gt_count true boxes drawn from the
// true-score distribution plus a drawn number of spurious boxes; scores are
// rounded to 6 decimals so serialization round-trips exactly.
std::vector<ImageRecord> generate_synthetic(const GeneratorConfig& cfg);

}  // namespace rejgate
