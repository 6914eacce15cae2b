#include "rejgate/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "rejgate/errors.hpp"
#include "rejgate/format.hpp"
#include "rejgate/rng.hpp"

namespace rejgate {
namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void line_error(std::size_t line_no, const std::string& message) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + message);
}

std::string json_quote(const std::string& text) { return nlohmann::json(text).dump(); }

double require_score(const ordered_json& value, std::size_t line_no) {
  if (!value.is_number()) line_error(line_no, "box score must be a number");
  const double score = value.get<double>();
  if (!(score >= 0.0 && score <= 1.0)) {
    line_error(line_no, "box score " + std::to_string(score) + " is outside [0, 1]");
  }
  return score;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ValidationError("failed while writing " + path.string());
}

// ---- seeded samplers ----
// Hand-rolled so that generated datasets depend only on (config, seed), not on
// the standard library's distribution algorithms.

double sample_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // in (0, 1], keeps log finite
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double sample_gamma(std::mt19937_64& rng, double shape) {
  if (shape < 1.0) {
    const double boost = sample_gamma(rng, shape + 1.0);
    double u = uniform01(rng);
    while (u == 0.0) u = uniform01(rng);
    return boost * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = sample_normal(rng);
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    double u = uniform01(rng);
    while (u == 0.0) u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_beta(std::mt19937_64& rng, double alpha, double beta) {
  const double x = sample_gamma(rng, alpha);
  const double y = sample_gamma(rng, beta);
  const double sum = x + y;
  return sum > 0.0 ? x / sum : 0.5;
}

int sample_poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01(rng);
  } while (p > limit);
  return k - 1;
}

bool is_integer_valued(double v) { return std::floor(v) == v; }

int sample_count(const Distribution& dist, std::mt19937_64& rng) {
  switch (dist.kind) {
    case Distribution::Kind::poisson:
      return sample_poisson(rng, dist.a);
    case Distribution::Kind::constant:
      return static_cast<int>(dist.a);
    case Distribution::Kind::uniform: {
      const auto lo = static_cast<int>(dist.a);
      const auto hi = static_cast<int>(dist.b);
      return lo + static_cast<int>(bounded_index(rng, static_cast<std::size_t>(hi - lo + 1)));
    }
    case Distribution::Kind::beta:
      break;
  }
  throw ValidationError("beta is not a valid count distribution");
}

double sample_score(const Distribution& dist, std::mt19937_64& rng) {
  switch (dist.kind) {
    case Distribution::Kind::uniform:
      return dist.a + (dist.b - dist.a) * uniform01(rng);
    case Distribution::Kind::beta:
      return sample_beta(rng, dist.a, dist.b);
    case Distribution::Kind::constant:
      return dist.a;
    case Distribution::Kind::poisson:
      break;
  }
  throw ValidationError("poisson is not a valid score distribution");
}

void require_count_distribution(const Distribution& dist, const std::string& context) {
  switch (dist.kind) {
    case Distribution::Kind::poisson:
      if (dist.a < 0.0) throw ValidationError(context + ": poisson mean must be >= 0");
      return;
    case Distribution::Kind::constant:
      if (dist.a < 0.0 || !is_integer_valued(dist.a)) {
        throw ValidationError(context + ": constant count must be a non-negative integer");
      }
      return;
    case Distribution::Kind::uniform:
      if (dist.a < 0.0 || dist.b < dist.a || !is_integer_valued(dist.a) ||
          !is_integer_valued(dist.b)) {
        throw ValidationError(context + ": uniform count bounds must be integers with lo <= hi");
      }
      return;
    case Distribution::Kind::beta:
      throw ValidationError(context + ": beta cannot generate counts");
  }
}

void require_score_distribution(const Distribution& dist, const std::string& context) {
  switch (dist.kind) {
    case Distribution::Kind::uniform:
      if (!(dist.a >= 0.0 && dist.b <= 1.0 && dist.a <= dist.b)) {
        throw ValidationError(context + ": uniform score bounds must satisfy 0 <= lo <= hi <= 1");
      }
      return;
    case Distribution::Kind::beta:
      if (!(dist.a > 0.0 && dist.b > 0.0)) {
        throw ValidationError(context + ": beta parameters must be positive");
      }
      return;
    case Distribution::Kind::constant:
      if (!(dist.a >= 0.0 && dist.a <= 1.0)) {
        throw ValidationError(context + ": constant score must lie in [0, 1]");
      }
      return;
    case Distribution::Kind::poisson:
      throw ValidationError(context + ": poisson cannot generate scores");
  }
}

double require_param(const nlohmann::json& spec, const char* key, const std::string& context) {
  if (!spec.contains(key) || !spec[key].is_number()) {
    throw ValidationError(context + ": distribution is missing numeric parameter '" + key + "'");
  }
  return spec[key].get<double>();
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

ImageRecord DetectionRecord::to_image() const {
  ImageRecord image;
  image.image_id = image_id;
  image.season = SeasonId::parse(season);
  image.scores.reserve(boxes.size());
  for (const WireBox& box : boxes) image.scores.push_back(box.score);
  image.gt_count = gt_count;
  return image;
}

DetectionRecord DetectionRecord::from_image(const ImageRecord& image) {
  DetectionRecord record;
  record.image_id = image.image_id;
  record.season = image.season.label();
  record.boxes.reserve(image.scores.size());
  for (double score : image.scores) record.boxes.push_back(WireBox{score, {}});
  record.gt_count = image.gt_count;
  return record;
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file: " + path.string());

  std::vector<DetectionRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::set<std::string> warned_fields;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    ordered_json doc;
    try {
      doc = ordered_json::parse(line);
    } catch (const std::exception& e) {
      line_error(line_no, std::string("malformed JSON (") + e.what() + ")");
    }
    if (!doc.is_object()) line_error(line_no, "record must be a JSON object");

    for (const auto& [key, value] : doc.items()) {
      (void)value;
      if (key == "image_id" || key == "season" || key == "boxes" || key == "gt_count") continue;
      if (warned_fields.insert(key).second) {
        std::cerr << "warning: ignoring unknown field " << json_quote(key) << " (first seen at line "
                  << line_no << ")\n";
      }
    }

    DetectionRecord record;
    if (!doc.contains("image_id") || !doc["image_id"].is_string()) {
      line_error(line_no, "missing string field 'image_id'");
    }
    record.image_id = doc["image_id"].get<std::string>();
    if (record.image_id.empty()) line_error(line_no, "image_id must be non-empty");
    if (!seen_ids.insert(record.image_id).second) {
      line_error(line_no, "duplicate image_id " + json_quote(record.image_id));
    }

    if (!doc.contains("season") || !doc["season"].is_string()) {
      line_error(line_no, "missing string field 'season'");
    }
    record.season = doc["season"].get<std::string>();
    try {
      SeasonId::parse(record.season);
    } catch (const ValidationError& e) {
      line_error(line_no, e.what());
    }

    if (!doc.contains("boxes") || !doc["boxes"].is_array()) {
      line_error(line_no, "missing array field 'boxes'");
    }
    for (const auto& box_json : doc["boxes"]) {
      if (!box_json.is_object() || !box_json.contains("score")) {
        line_error(line_no, "every box must be an object with a 'score' field");
      }
      WireBox box;
      box.score = require_score(box_json["score"], line_no);
      for (const auto& [key, value] : box_json.items()) {
        if (key != "score") box.extras[key] = value;
      }
      record.boxes.push_back(std::move(box));
    }

    if (!doc.contains("gt_count") || !doc["gt_count"].is_number_integer() ||
        doc["gt_count"].get<long long>() < 0) {
      line_error(line_no, "gt_count must be a non-negative integer");
    }
    record.gt_count = doc["gt_count"].get<int>();

    records.push_back(std::move(record));
  }
  return records;
}

std::vector<ImageRecord> load_dataset(const std::filesystem::path& path) {
  const std::vector<DetectionRecord> records = load_detections(path);
  std::vector<ImageRecord> images;
  images.reserve(records.size());
  for (const DetectionRecord& record : records) images.push_back(record.to_image());
  return images;
}

std::string to_jsonl(std::span<const DetectionRecord> records) {
  std::string out;
  for (const DetectionRecord& record : records) {
    out += "{\"image_id\":" + json_quote(record.image_id);
    out += ",\"season\":" + json_quote(record.season);
    out += ",\"boxes\":[";
    bool first_box = true;
    for (const WireBox& box : record.boxes) {
      if (!first_box) out += ',';
      first_box = false;
      out += "{\"score\":" + fixed6(box.score);
      for (const auto& [key, value] : box.extras.items()) {
        out += ',' + json_quote(key) + ':' + value.dump();
      }
      out += '}';
    }
    out += "],\"gt_count\":" + std::to_string(record.gt_count) + "}\n";
  }
  return out;
}

std::string to_jsonl(std::span<const ImageRecord> images) {
  std::vector<DetectionRecord> records;
  records.reserve(images.size());
  for (const ImageRecord& image : images) records.push_back(DetectionRecord::from_image(image));
  return to_jsonl(records);
}

void write_dataset(const std::filesystem::path& path, std::span<const DetectionRecord> records) {
  write_text(path, to_jsonl(records));
}

void write_dataset(const std::filesystem::path& path, std::span<const ImageRecord> images) {
  write_text(path, to_jsonl(images));
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::train:
      return "train";
    case Role::val:
      return "val";
    case Role::test:
      return "test";
  }
  return "train";
}

std::string_view to_string(SplitKind kind) {
  return kind == SplitKind::historic ? "historic" : "present_aware";
}

Role parse_role(std::string_view text) {
  if (text == "train") return Role::train;
  if (text == "val") return Role::val;
  if (text == "test") return Role::test;
  throw ValidationError("unknown split role '" + std::string(text) +
                        "' (expected train, val, or test)");
}

SeasonalSplit build_split(std::span<const ImageRecord> images, SeasonId target, SplitKind kind,
                          SplitRatios ratios, std::uint64_t seed) {
  if (!(ratios.dev_of_current > 0.0 && ratios.dev_of_current < 1.0) ||
      !(ratios.train_of_dev > 0.0 && ratios.train_of_dev < 1.0)) {
    throw ValidationError("split ratios must lie strictly between 0 and 1");
  }

  std::vector<std::string> target_ids;
  std::vector<std::string> prior_ids;
  for (const ImageRecord& image : images) {
    if (image.season == target) {
      target_ids.push_back(image.image_id);
    } else if (image.season < target) {
      prior_ids.push_back(image.image_id);
    }
    // Seasons after the target play no role in its split.
  }
  if (target_ids.empty()) {
    throw ValidationError("no images belong to target season " + target.label());
  }
  if (kind == SplitKind::historic && prior_ids.empty()) {
    throw ValidationError("historic split needs images from a season before " + target.label());
  }

  // Sorting before the seeded shuffle makes the split a pure function of the
  // id multiset and the seed, independent of input order.
  std::sort(target_ids.begin(), target_ids.end());
  seeded_shuffle(target_ids, seed, 0);
  const auto n_dev_pool = static_cast<std::size_t>(
      std::floor(ratios.dev_of_current * static_cast<double>(target_ids.size())));

  SeasonalSplit split;
  split.target_season = target;
  split.kind = kind;
  for (std::size_t i = n_dev_pool; i < target_ids.size(); ++i) {
    split.assignment.emplace(target_ids[i], Role::test);
  }

  std::vector<std::string> dev_ids = prior_ids;
  if (kind == SplitKind::present_aware) {
    dev_ids.insert(dev_ids.end(), target_ids.begin(),
                   target_ids.begin() + static_cast<std::ptrdiff_t>(n_dev_pool));
  }
  std::sort(dev_ids.begin(), dev_ids.end());
  seeded_shuffle(dev_ids, seed, 1);
  const auto n_train = static_cast<std::size_t>(
      std::floor(ratios.train_of_dev * static_cast<double>(dev_ids.size())));
  for (std::size_t i = 0; i < dev_ids.size(); ++i) {
    split.assignment.emplace(std::move(dev_ids[i]), i < n_train ? Role::train : Role::val);
  }
  return split;
}

std::string split_to_csv(const SeasonalSplit& split) {
  std::string out = "image_id,role\n";
  for (const auto& [id, role] : split.assignment) {  // std::map keeps ids sorted
    out += id;
    out += ',';
    out += to_string(role);
    out += '\n';
  }
  return out;
}

SplitAssignment load_split_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open split manifest: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError("split manifest is empty: " + path.string());
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "image_id,role") {
    throw ValidationError("split manifest must start with the header 'image_id,role'");
  }
  SplitAssignment assignment;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) line_error(line_no, "expected 'image_id,role'");
    std::string id = line.substr(0, comma);
    if (id.empty()) line_error(line_no, "empty image_id");
    Role role = Role::train;
    try {
      role = parse_role(line.substr(comma + 1));
    } catch (const ValidationError& e) {
      line_error(line_no, e.what());
    }
    if (!assignment.emplace(std::move(id), role).second) {
      line_error(line_no, "duplicate image_id in split manifest");
    }
  }
  return assignment;
}

std::vector<ImageRecord> select_role(std::span<const ImageRecord> images,
                                     const SplitAssignment& assignment, Role role) {
  std::vector<ImageRecord> selected;
  for (const ImageRecord& image : images) {
    const auto it = assignment.find(image.image_id);
    if (it != assignment.end() && it->second == role) selected.push_back(image);
  }
  return selected;
}

Distribution Distribution::from_json(const nlohmann::json& spec, const std::string& context) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
    throw ValidationError(context + ": distribution must be an object with a string 'kind'");
  }
  const std::string kind = spec["kind"].get<std::string>();
  Distribution dist;
  if (kind == "uniform") {
    dist.kind = Kind::uniform;
    dist.a = require_param(spec, "lo", context);
    dist.b = require_param(spec, "hi", context);
  } else if (kind == "beta") {
    dist.kind = Kind::beta;
    dist.a = require_param(spec, "alpha", context);
    dist.b = require_param(spec, "beta", context);
  } else if (kind == "poisson") {
    dist.kind = Kind::poisson;
    dist.a = require_param(spec, "mean", context);
  } else if (kind == "constant") {
    dist.kind = Kind::constant;
    dist.a = require_param(spec, "value", context);
  } else {
    throw ValidationError(context + ": unknown distribution kind '" + kind + "'");
  }
  return dist;
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("generator config must be a JSON object");
  GeneratorConfig cfg;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0) {
      throw ValidationError("generator seed must be a non-negative integer");
    }
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (!doc.contains("populations") || !doc["populations"].is_array() ||
      doc["populations"].empty()) {
    throw ValidationError("generator config needs a non-empty 'populations' array");
  }
  std::set<std::string> names;
  for (const auto& pop_json : doc["populations"]) {
    PopulationConfig pop;
    if (!pop_json.is_object() || !pop_json.contains("name") || !pop_json["name"].is_string()) {
      throw ValidationError("every population needs a string 'name'");
    }
    pop.name = pop_json["name"].get<std::string>();
    if (pop.name.empty() || !names.insert(pop.name).second) {
      throw ValidationError("population names must be non-empty and unique");
    }
    const std::string context = "population '" + pop.name + "'";
    if (!pop_json.contains("image_count") || !pop_json["image_count"].is_number_integer() ||
        pop_json["image_count"].get<long long>() < 0) {
      throw ValidationError(context + ": image_count must be a non-negative integer");
    }
    pop.image_count = pop_json["image_count"].get<int>();
    if (!pop_json.contains("season") || !pop_json["season"].is_string()) {
      throw ValidationError(context + ": missing string field 'season'");
    }
    pop.season = pop_json["season"].get<std::string>();
    SeasonId::parse(pop.season);

    const auto field = [&](const char* key) -> const nlohmann::json& {
      if (!pop_json.contains(key)) {
        throw ValidationError(context + ": missing distribution '" + key + "'");
      }
      return pop_json[key];
    };
    pop.gt_count = Distribution::from_json(field("gt_count"), context + ".gt_count");
    pop.true_score = Distribution::from_json(field("true_score"), context + ".true_score");
    pop.spurious_count =
        Distribution::from_json(field("spurious_count"), context + ".spurious_count");
    pop.spurious_score =
        Distribution::from_json(field("spurious_score"), context + ".spurious_score");

    require_count_distribution(pop.gt_count, context + ".gt_count");
    require_score_distribution(pop.true_score, context + ".true_score");
    require_count_distribution(pop.spurious_count, context + ".spurious_count");
    require_score_distribution(pop.spurious_score, context + ".spurious_score");

    cfg.populations.push_back(std::move(pop));
  }
  return cfg;
}

GeneratorConfig GeneratorConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open generator config: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw ValidationError("malformed generator config " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::vector<ImageRecord> generate_synthetic(const GeneratorConfig& cfg) {
  std::vector<ImageRecord> images;
  for (std::size_t pop_index = 0; pop_index < cfg.populations.size(); ++pop_index) {
    const PopulationConfig& pop = cfg.populations[pop_index];
    const SeasonId season = SeasonId::parse(pop.season);
    auto rng = seeded_engine(cfg.seed, pop_index);
    for (int i = 0; i < pop.image_count; ++i) {
      ImageRecord image;
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "-%05d", i);
      image.image_id = pop.name + suffix;
      image.season = season;
      image.gt_count = sample_count(pop.gt_count, rng);
      const int spurious = sample_count(pop.spurious_count, rng);
      image.scores.reserve(static_cast<std::size_t>(image.gt_count + spurious));
      for (int b = 0; b < image.gt_count; ++b) {
        image.scores.push_back(round6(std::clamp(sample_score(pop.true_score, rng), 0.0, 1.0)));
      }
      for (int b = 0; b < spurious; ++b) {
        image.scores.push_back(
            round6(std::clamp(sample_score(pop.spurious_score, rng), 0.0, 1.0)));
      }
      images.push_back(std::move(image));
    }
  }
  return images;
}

}  // namespace rejgate
