#include "rejgate/data.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "rejgate/errors.hpp"
#include "test_util.hpp"

using namespace rejgate;

namespace {

std::vector<ImageRecord> seasonal_dataset(std::mt19937_64& rng,
                                          const std::vector<std::pair<std::string, int>>& seasons) {
  std::vector<ImageRecord> images;
  int serial = 0;
  for (const auto& [label, count] : seasons) {
    for (int i = 0; i < count; ++i) {
      ImageRecord image = testutil::random_image(rng, label + "-" + std::to_string(serial++));
      image.season = SeasonId::parse(label);
      images.push_back(std::move(image));
    }
  }
  return images;
}

GeneratorConfig tiny_config() {
  return GeneratorConfig::from_json(nlohmann::json::parse(R"({
    "seed": 11,
    "populations": [
      {
        "name": "clean", "image_count": 100, "season": "K19",
        "gt_count": {"kind": "poisson", "mean": 4.0},
        "true_score": {"kind": "beta", "alpha": 9.0, "beta": 2.0},
        "spurious_count": {"kind": "constant", "value": 0},
        "spurious_score": {"kind": "beta", "alpha": 1.0, "beta": 9.0}
      },
      {
        "name": "noisy", "image_count": 50, "season": "K19",
        "gt_count": {"kind": "uniform", "lo": 3, "hi": 8},
        "true_score": {"kind": "beta", "alpha": 2.0, "beta": 6.0},
        "spurious_count": {"kind": "poisson", "mean": 6.0},
        "spurious_score": {"kind": "uniform", "lo": 0.0, "hi": 0.3}
      }
    ]
  })"));
}

}  // namespace

TEST_CASE("load_detections parses one record per line") {
  testutil::TempDir dir("load");
  const auto path = dir.path() / "data.jsonl";
  testutil::write_file(path,
                       "{\"image_id\":\"a1\",\"season\":\"K19\",\"boxes\":[{\"score\":0.9}],"
                       "\"gt_count\":1}\n");
  const std::vector<ImageRecord> images = load_dataset(path);
  REQUIRE(images.size() == 1);
  CHECK(images[0].image_id == "a1");
  CHECK(images[0].season == SeasonId::parse("K19"));
  CHECK(images[0].scores == std::vector<double>{0.9});
  CHECK(images[0].gt_count == 1);
}

TEST_CASE("load_detections rejects bad records with line numbers") {
  testutil::TempDir dir("load_bad");
  const auto path = dir.path() / "data.jsonl";

  const auto expect_error = [&](const std::string& content, const std::string& needle) {
    testutil::write_file(path, content);
    try {
      load_dataset(path);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  const std::string good =
      "{\"image_id\":\"a1\",\"season\":\"K19\",\"boxes\":[{\"score\":0.9}],\"gt_count\":1}\n";

  // score outside [0, 1], on line 2
  expect_error(good +
                   "{\"image_id\":\"a2\",\"season\":\"K19\",\"boxes\":[{\"score\":1.5}],"
                   "\"gt_count\":1}\n",
               "line 2");
  // duplicate id
  expect_error(good + good, "duplicate image_id");
  // malformed JSON
  expect_error("{not json\n", "line 1");
  // negative count
  expect_error(
      "{\"image_id\":\"a1\",\"season\":\"K19\",\"boxes\":[],\"gt_count\":-2}\n",
      "gt_count");
  // bad season label
  expect_error(
      "{\"image_id\":\"a1\",\"season\":\"KX9\",\"boxes\":[],\"gt_count\":0}\n",
      "season");
  // missing file
  CHECK_THROWS_AS(load_dataset(dir.path() / "absent.jsonl"), ValidationError);
}

TEST_CASE("dataset round-trips exactly, extras included") {
  testutil::TempDir dir("roundtrip");
  const auto path = dir.path() / "data.jsonl";

  DetectionRecord record;
  record.image_id = "a1";
  record.season = "S20";
  record.gt_count = 2;
  WireBox box;
  box.score = 0.123456;
  box.extras["x"] = 10;
  box.extras["y"] = 20.5;
  box.extras["w"] = 3;
  record.boxes.push_back(box);
  record.boxes.push_back(WireBox{0.75, nlohmann::ordered_json::object()});

  write_dataset(path, std::vector<DetectionRecord>{record});
  const std::vector<DetectionRecord> loaded = load_detections(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0] == record);

  // and the byte stream is reproduced too
  const std::string first = testutil::read_file(path);
  write_dataset(path, loaded);
  CHECK(testutil::read_file(path) == first);
}

TEST_CASE("generated datasets round-trip through JSONL") {
  const std::vector<ImageRecord> images = generate_synthetic(tiny_config());
  testutil::TempDir dir("gen_roundtrip");
  const auto path = dir.path() / "data.jsonl";
  write_dataset(path, images);
  CHECK(load_dataset(path) == images);
}

TEST_CASE("build_split respects seasonal boundaries") {
  std::mt19937_64 rng(6001);
  const std::vector<ImageRecord> images =
      seasonal_dataset(rng, {{"K18", 30}, {"S19", 25}, {"K19", 40}});
  const SeasonId target = SeasonId::parse("K19");

  const SeasonalSplit historic =
      build_split(images, target, SplitKind::historic, SplitRatios{}, 42);
  const SeasonalSplit present =
      build_split(images, target, SplitKind::present_aware, SplitRatios{}, 42);

  std::set<std::string> historic_test;
  std::set<std::string> present_test;
  for (const ImageRecord& image : images) {
    const auto h = historic.assignment.find(image.image_id);
    const auto p = present.assignment.find(image.image_id);
    if (h != historic.assignment.end()) {
      if (h->second == Role::test) {
        historic_test.insert(image.image_id);
        CHECK(image.season == target);
      } else {
        CHECK(image.season < target);  // historic dev predates the target
      }
    }
    if (p != present.assignment.end() && p->second == Role::test) {
      present_test.insert(image.image_id);
      CHECK(image.season == target);
    }
  }
  CHECK(historic_test == present_test);  // same seed, same test set
  CHECK_FALSE(historic_test.empty());

  // present-aware dev additionally draws on the target season dev pool
  bool present_dev_has_target = false;
  for (const ImageRecord& image : images) {
    const auto p = present.assignment.find(image.image_id);
    if (p == present.assignment.end() || p->second == Role::test) continue;
    if (image.season == target) present_dev_has_target = true;
  }
  CHECK(present_dev_has_target);

  // identical seeds reproduce the whole assignment
  const SeasonalSplit again =
      build_split(images, target, SplitKind::historic, SplitRatios{}, 42);
  CHECK(again.assignment == historic.assignment);
}

TEST_CASE("build_split error cases") {
  std::mt19937_64 rng(6002);
  const std::vector<ImageRecord> single = seasonal_dataset(rng, {{"K19", 10}});
  CHECK_THROWS_AS(
      build_split(single, SeasonId::parse("K19"), SplitKind::historic, SplitRatios{}, 0),
      ValidationError);
  CHECK_THROWS_AS(
      build_split(single, SeasonId::parse("K20"), SplitKind::historic, SplitRatios{}, 0),
      ValidationError);  // empty target season
  CHECK_THROWS_AS(build_split(single, SeasonId::parse("K19"), SplitKind::present_aware,
                              SplitRatios{1.2, 0.8}, 0),
                  ValidationError);
}

TEST_CASE("split manifests round-trip through CSV") {
  std::mt19937_64 rng(6003);
  const std::vector<ImageRecord> images = seasonal_dataset(rng, {{"K18", 12}, {"K19", 15}});
  const SeasonalSplit split =
      build_split(images, SeasonId::parse("K19"), SplitKind::present_aware, SplitRatios{}, 5);

  testutil::TempDir dir("split_csv");
  const auto path = dir.path() / "split.csv";
  testutil::write_file(path, split_to_csv(split));
  CHECK(load_split_manifest(path) == split.assignment);

  const std::vector<ImageRecord> vals = select_role(images, split.assignment, Role::val);
  for (const ImageRecord& image : vals) {
    CHECK(split.assignment.at(image.image_id) == Role::val);
  }

  testutil::write_file(path, "wrong,header\n");
  CHECK_THROWS_AS(load_split_manifest(path), ValidationError);
  testutil::write_file(path, "image_id,role\nabc,chef\n");
  CHECK_THROWS_AS(load_split_manifest(path), ValidationError);
}

TEST_CASE("generate_synthetic honors counts, seasons and the seed") {
  const GeneratorConfig cfg = tiny_config();
  const std::vector<ImageRecord> images = generate_synthetic(cfg);
  REQUIRE(images.size() == 150);

  int clean = 0;
  std::set<std::string> ids;
  for (const ImageRecord& image : images) {
    CHECK(image.season == SeasonId::parse("K19"));
    CHECK(image.gt_count >= 0);
    for (double s : image.scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    CHECK(ids.insert(image.image_id).second);
    if (image.image_id.starts_with("clean")) ++clean;
  }
  CHECK(clean == 100);

  CHECK(generate_synthetic(cfg) == images);  // pure function of the config

  GeneratorConfig reseeded = cfg;
  reseeded.seed = 12;
  CHECK(generate_synthetic(reseeded) != images);
}

TEST_CASE("generator configs are validated") {
  const auto invalid = [](const char* body) {
    return nlohmann::json::parse(body);
  };
  // unknown distribution kind
  CHECK_THROWS_AS(GeneratorConfig::from_json(invalid(R"({
    "seed": 1,
    "populations": [{
      "name": "p", "image_count": 1, "season": "K19",
      "gt_count": {"kind": "zipf", "mean": 1.0},
      "true_score": {"kind": "constant", "value": 0.5},
      "spurious_count": {"kind": "constant", "value": 0},
      "spurious_score": {"kind": "constant", "value": 0.1}
    }]})")),
                  ValidationError);
  // beta cannot generate counts
  CHECK_THROWS_AS(GeneratorConfig::from_json(invalid(R"({
    "populations": [{
      "name": "p", "image_count": 1, "season": "K19",
      "gt_count": {"kind": "beta", "alpha": 1.0, "beta": 1.0},
      "true_score": {"kind": "constant", "value": 0.5},
      "spurious_count": {"kind": "constant", "value": 0},
      "spurious_score": {"kind": "constant", "value": 0.1}
    }]})")),
                  ValidationError);
  // score bounds outside [0, 1]
  CHECK_THROWS_AS(GeneratorConfig::from_json(invalid(R"({
    "populations": [{
      "name": "p", "image_count": 1, "season": "K19",
      "gt_count": {"kind": "constant", "value": 1},
      "true_score": {"kind": "uniform", "lo": 0.5, "hi": 1.5},
      "spurious_count": {"kind": "constant", "value": 0},
      "spurious_score": {"kind": "constant", "value": 0.1}
    }]})")),
                  ValidationError);
  // duplicate population names
  CHECK_THROWS_AS(GeneratorConfig::from_json(invalid(R"({
    "populations": [
      {"name": "p", "image_count": 1, "season": "K19",
       "gt_count": {"kind": "constant", "value": 1},
       "true_score": {"kind": "constant", "value": 0.5},
       "spurious_count": {"kind": "constant", "value": 0},
       "spurious_score": {"kind": "constant", "value": 0.1}},
      {"name": "p", "image_count": 1, "season": "K19",
       "gt_count": {"kind": "constant", "value": 1},
       "true_score": {"kind": "constant", "value": 0.5},
       "spurious_count": {"kind": "constant", "value": 0},
       "spurious_score": {"kind": "constant", "value": 0.1}}
    ]})")),
                  ValidationError);
  // missing populations
  CHECK_THROWS_AS(GeneratorConfig::from_json(invalid(R"({"seed": 3})")), ValidationError);
}

TEST_CASE("property: split roles partition the assigned ids") {
  std::mt19937_64 rng(6004);
  for (int trial = 0; trial < 25; ++trial) {
    const int n_seasons = 2 + static_cast<int>(rng() % 3);
    std::vector<std::pair<std::string, int>> seasons;
    const char* labels[] = {"S18", "K18", "S19", "K19", "S20"};
    for (int s = 0; s < n_seasons; ++s) {
      seasons.emplace_back(labels[s], 3 + static_cast<int>(rng() % 20));
    }
    const std::vector<ImageRecord> images = seasonal_dataset(rng, seasons);
    const SeasonId target = SeasonId::parse(seasons.back().first);
    const SplitKind kind = rng() % 2 == 0 ? SplitKind::historic : SplitKind::present_aware;
    const SeasonalSplit split = build_split(images, target, kind, SplitRatios{}, rng());

    std::set<std::string> known_ids;
    for (const ImageRecord& image : images) known_ids.insert(image.image_id);
    for (const auto& [id, role] : split.assignment) {
      CHECK(known_ids.count(id) == 1);  // roles are disjoint by map construction
      (void)role;
    }
  }
}
