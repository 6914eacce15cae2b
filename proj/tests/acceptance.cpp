// Acceptance suite. Each criterion prints one PASS/FAIL line; the process
// exits non-zero if any criterion fails. Run directly or via `ctest -R acceptance`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rejgate/calibration.hpp"
#include "rejgate/cli.hpp"
#include "rejgate/data.hpp"
#include "rejgate/model.hpp"
#include "rejgate/oracle.hpp"
#include "rejgate/stats.hpp"
#include "test_util.hpp"

using namespace rejgate;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& message) {
    if (!condition && ok) {
      ok = false;
      detail = message;
    }
  }
};

class Runner {
 public:
  void criterion(int number, const std::string& name, const std::function<void(Check&)>& body,
                 double max_seconds = 0.0) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      body(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (max_seconds > 0.0) {
      check.require(seconds < max_seconds, "exceeded the " + std::to_string(max_seconds) +
                                               "s budget (" + std::to_string(seconds) + "s)");
    }
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.2fs", seconds);
    std::cout << (check.ok ? "PASS" : "FAIL") << "  criterion " << number << ": " << name << " ("
              << timing << ")";
    if (!check.ok) std::cout << " -- " << check.detail;
    std::cout << std::endl;
    all_ok_ &= check.ok;
  }

  bool all_ok() const { return all_ok_; }

 private:
  bool all_ok_ = true;
};

std::vector<double> random_int_list(std::mt19937_64& rng, int max_len, int max_value) {
  const auto len = 1 + rng() % static_cast<std::uint64_t>(max_len);
  std::vector<double> values(len);
  for (double& v : values) {
    v = static_cast<double>(rng() % static_cast<std::uint64_t>(max_value + 1));
  }
  return values;
}

std::filesystem::path config_path(const char* name) {
  return std::filesystem::path(REJGATE_SOURCE_DIR) / "configs" / name;
}

std::vector<double> fraction_grid() {
  std::vector<double> fractions;
  for (int i = 0; i < 20; ++i) fractions.push_back(0.05 * i);
  return fractions;
}

double accepted_set_mae(const std::vector<ImageRecord>& images, const RejectionLevel& level) {
  double sum = 0.0;
  int count = 0;
  for (const ImageRecord& image : images) {
    const GateDecision d = gate(image, level);
    if (d.accepted) {
      sum += std::abs(d.surviving_count - image.gt_count);
      ++count;
    }
  }
  return count == 0 ? std::numeric_limits<double>::infinity() : sum / count;
}

const MedianSweepPoint& sweep_point_at(const CalibrationReport& report, double median) {
  for (const MedianSweepPoint& p : report.median_sweep) {
    if (p.median == median) return p;
  }
  throw std::logic_error("median missing from sweep");
}

// ---- criteria 1-5: statistical primitives against independent oracles ----

void criterion_effect_oracle(Check& check) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> a = random_int_list(rng, 50, 10);
    const std::vector<double> r = random_int_list(rng, 50, 10);
    const double production = common_language_effect_size(a, r);
    const double brute = testutil::cl_effect_bruteforce(a, r);
    check.require(std::abs(production - brute) <= 1e-12,
                  "mismatch at trial " + std::to_string(trial));
  }
}

void criterion_complement_law(Check& check) {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> a = random_int_list(rng, 50, 10);
    const std::vector<double> r = random_int_list(rng, 50, 10);
    const double sum = common_language_effect_size(a, r) + common_language_effect_size(r, a);
    check.require(std::abs(sum - 1.0) <= 1e-12, "complement violated at trial " +
                                                    std::to_string(trial));
  }
}

void criterion_oracle_monotonicity(Check& check) {
  std::mt19937_64 rng(103);
  const std::vector<double> fractions = fraction_grid();
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 1 + static_cast<int>(rng() % 200);
    const std::vector<ImageRecord> images = testutil::random_dataset(rng, n);
    const double threshold = static_cast<double>(rng() % 1001) / 1000.0;
    const OracleCurve curve =
        oracle_curve(images, OracleMode::confidence_aware, fractions, threshold);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      check.require(curve.points[i].mae <= curve.points[i - 1].mae,
                    "MAE rose at trial " + std::to_string(trial));
    }
  }
}

void criterion_oracle_dominance(Check& check) {
  std::mt19937_64 rng(104);
  const std::vector<double> fractions = fraction_grid();
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 1 + static_cast<int>(rng() % 200);
    const std::vector<ImageRecord> images = testutil::random_dataset(rng, n);
    const OracleCurve best = oracle_curve(images, OracleMode::best_case, fractions);
    for (int k = 0; k < 5; ++k) {
      const double threshold = static_cast<double>(rng() % 1001) / 1000.0;
      const OracleCurve aware =
          oracle_curve(images, OracleMode::confidence_aware, fractions, threshold);
      for (std::size_t i = 0; i < fractions.size(); ++i) {
        check.require(best.points[i].mae <= aware.points[i].mae,
                      "dominance violated at trial " + std::to_string(trial));
      }
    }
  }
}

void criterion_best_case(Check& check) {
  std::mt19937_64 rng(105);
  for (int trial = 0; trial < 1000; ++trial) {
    const ImageRecord image = testutil::random_image(rng, "img");
    int grid_min = std::abs(image.gt_count);
    for (int i = 0; i <= 1000; ++i) {
      grid_min = std::min(grid_min, absolute_error(image, static_cast<double>(i) / 1000.0));
    }
    check.require(best_case_ae(image) == grid_min, "mismatch at image " + std::to_string(trial));
  }
}

// ---- criteria 6-9: shipped synthetic scenarios ----

void criterion_calibration_sanity(Check& check) {
  const GeneratorConfig cfg = GeneratorConfig::load(config_path("clean_noisy.json"));
  const std::vector<ImageRecord> images = generate_synthetic(cfg);
  check.require(images.size() == 1000, "config should generate 500 + 500 images");

  CalibrationConfig cal_cfg;
  cal_cfg.conf_grid = threshold_grid(0.01);
  cal_cfg.median_grid = threshold_grid(0.01);
  cal_cfg.bootstrap = {1000, 0.05, 2024};
  cal_cfg.threads = 0;  // all cores
  const CalibrationReport report = calibrate(images, cal_cfg);

  double whole_sum = 0.0;
  for (const ImageRecord& image : images) {
    whole_sum += absolute_error(image, report.conf_threshold);
  }
  const double whole_mae = whole_sum / static_cast<double>(images.size());
  const double gated_mae = accepted_set_mae(images, report.absolute);
  check.require(gated_mae < whole_mae, "accepted-set MAE does not beat whole-set MAE");

  const MedianSweepPoint& at_absolute =
      sweep_point_at(report, report.absolute.median_threshold);
  check.require(at_absolute.effect.has_value(), "absolute point has no effect estimate");
  check.require(at_absolute.effect->point > 0.5, "effect size not above 0.5");
  check.require(at_absolute.effect->lo > 0.5, "interval does not exclude 0.5");
  check.require(at_absolute.rejected_fraction > 0.0 && at_absolute.rejected_fraction < 1.0,
                "rejected fraction not strictly inside (0, 1)");

  const MedianSweepPoint& at_relative =
      sweep_point_at(report, report.relative.median_threshold);
  check.require(at_relative.rejected_fraction <= at_absolute.rejected_fraction,
                "relative level rejects more than absolute");
}

void criterion_ushape(Check& check) {
  const GeneratorConfig cfg = GeneratorConfig::load(config_path("ushape.json"));
  const std::vector<ImageRecord> images = generate_synthetic(cfg);
  const std::vector<double> grid = threshold_grid(0.01);
  const std::vector<SweepPoint> sweep =
      sweep_confidence(images, grid, {200, 0.05, 7}, 0);
  const double argmin = optimal_confidence(sweep);
  check.require(argmin > 0.0 && argmin < 1.0, "MAE argmin is not interior");
  double min_mae = sweep.front().mae.point;
  for (const SweepPoint& p : sweep) min_mae = std::min(min_mae, p.mae.point);
  check.require(sweep.front().mae.point >= 1.2 * min_mae,
                "low endpoint does not exceed the minimum by 20%");
  check.require(sweep.back().mae.point >= 1.2 * min_mae,
                "high endpoint does not exceed the minimum by 20%");
}

void criterion_drift(Check& check) {
  const GeneratorConfig cfg = GeneratorConfig::load(config_path("drift.json"));
  const std::vector<ImageRecord> images = generate_synthetic(cfg);
  const SeasonId target = SeasonId::parse("S20");
  const std::uint64_t seed = 42;

  const SeasonalSplit historic =
      build_split(images, target, SplitKind::historic, SplitRatios{}, seed);
  const SeasonalSplit present =
      build_split(images, target, SplitKind::present_aware, SplitRatios{}, seed);

  const std::vector<ImageRecord> test_h = select_role(images, historic.assignment, Role::test);
  const std::vector<ImageRecord> test_p = select_role(images, present.assignment, Role::test);
  check.require(test_h == test_p, "historic and present-aware test sets differ");

  CalibrationConfig cal_cfg;
  cal_cfg.conf_grid = threshold_grid(0.01);
  cal_cfg.median_grid = threshold_grid(0.01);
  cal_cfg.bootstrap = {400, 0.05, 11};
  cal_cfg.threads = 0;
  const CalibrationReport report_h =
      calibrate(select_role(images, historic.assignment, Role::val), cal_cfg);
  const CalibrationReport report_p =
      calibrate(select_role(images, present.assignment, Role::val), cal_cfg);

  const BootstrapConfig eval_cfg{400, 0.05, 12};
  const cli::LevelEvaluation eval_h =
      cli::evaluate_level(test_h, report_h.absolute, eval_cfg);
  const cli::LevelEvaluation eval_p =
      cli::evaluate_level(test_h, report_p.absolute, eval_cfg);
  check.require(eval_p.mae.point <= eval_h.mae.point,
                "present-aware calibration does not improve test MAE (historic " +
                    std::to_string(eval_h.mae.point) + ", present " +
                    std::to_string(eval_p.mae.point) + ")");
}

void criterion_heavy_rejection(Check& check) {
  const GeneratorConfig cfg = GeneratorConfig::load(config_path("heavy_tail.json"));
  const std::vector<ImageRecord> images = generate_synthetic(cfg);
  const std::vector<double> fractions{0.0, 0.9};
  // threshold fixed by the shipped scenario, not fitted
  const OracleCurve curve =
      oracle_curve(images, OracleMode::confidence_aware, fractions, 0.5);
  check.require(curve.points[1].mae <= 0.1 * curve.points[0].mae,
                "oracle at 90% rejection keeps more than 10% of the base MAE (" +
                    std::to_string(curve.points[0].mae) + " -> " +
                    std::to_string(curve.points[1].mae) + ")");
}

// ---- criterion 10: byte-identical runs across threads ----

void criterion_determinism(Check& check) {
  testutil::TempDir dir("acceptance_det");
  const auto out = [&](const std::string& name) { return (dir.path() / name).string(); };

  const auto run_with_threads = [&](const std::vector<std::string>& args,
                                    const char* threads) {
    ::setenv("REJECT_GATE_THREADS", threads, 1);
    const int code = cli::run(args);
    ::unsetenv("REJECT_GATE_THREADS");
    return code;
  };

  const auto compare_dirs = [&](const std::string& a, const std::string& b,
                                const std::string& what) {
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path() / a)) {
      names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    check.require(!names.empty(), what + ": no artifacts written");
    for (const std::string& name : names) {
      const bool same = testutil::read_file(dir.path() / a / name) ==
                        testutil::read_file(dir.path() / b / name);
      check.require(same, what + ": " + name + " differs between runs");
    }
  };

  const std::string config = config_path("drift.json").string();

  // generate (twice, then reuse the first dataset downstream)
  check.require(run_with_threads({"generate", "--config", config, "--out", out("gen_a")},
                                 "1") == 0,
                "generate run failed");
  check.require(run_with_threads({"generate", "--config", config, "--out", out("gen_b")},
                                 "4") == 0,
                "generate rerun failed");
  compare_dirs("gen_a", "gen_b", "generate");
  const std::string data = out("gen_a") + "/dataset.jsonl";

  // split
  const std::vector<std::string> split_args{"split",  "--data", data,          "--target-season",
                                            "S20",    "--kind", "historic",    "--seed",
                                            "3"};
  auto split_a = split_args;
  split_a.insert(split_a.end(), {"--out", out("split_a")});
  auto split_b = split_args;
  split_b.insert(split_b.end(), {"--out", out("split_b")});
  check.require(run_with_threads(split_a, "1") == 0, "split run failed");
  check.require(run_with_threads(split_b, "4") == 0, "split rerun failed");
  compare_dirs("split_a", "split_b", "split");
  const std::string split_csv = out("split_a") + "/split.csv";

  // sweep (on the validation role of the split)
  const std::vector<std::string> sweep_args{
      "sweep", "--data", data,   "--split", split_csv + ":val", "--grid-step", "0.05",
      "--bootstrap", "200", "--seed", "5"};
  auto sweep_a = sweep_args;
  sweep_a.insert(sweep_a.end(), {"--out", out("sweep_a")});
  auto sweep_b = sweep_args;
  sweep_b.insert(sweep_b.end(), {"--out", out("sweep_b")});
  check.require(run_with_threads(sweep_a, "1") == 0, "sweep run failed");
  check.require(run_with_threads(sweep_b, "4") == 0, "sweep rerun failed");
  compare_dirs("sweep_a", "sweep_b", "sweep");

  // calibrate
  const std::vector<std::string> cal_args{
      "calibrate", "--data", data, "--conf-threshold", "0.4", "--grid-step", "0.05",
      "--bootstrap", "200", "--seed", "5"};
  auto cal_a = cal_args;
  cal_a.insert(cal_a.end(), {"--out", out("cal_a")});
  auto cal_b = cal_args;
  cal_b.insert(cal_b.end(), {"--out", out("cal_b")});
  check.require(run_with_threads(cal_a, "1") == 0, "calibrate run failed");
  check.require(run_with_threads(cal_b, "4") == 0, "calibrate rerun failed");
  compare_dirs("cal_a", "cal_b", "calibrate");

  // evaluate
  const std::vector<std::string> eval_args{"evaluate", "--data", data,  "--level", "0.4,0.3",
                                           "--bootstrap", "200", "--seed", "6"};
  auto eval_a = eval_args;
  eval_a.insert(eval_a.end(), {"--out", out("eval_a")});
  auto eval_b = eval_args;
  eval_b.insert(eval_b.end(), {"--out", out("eval_b")});
  check.require(run_with_threads(eval_a, "1") == 0, "evaluate run failed");
  check.require(run_with_threads(eval_b, "4") == 0, "evaluate rerun failed");
  compare_dirs("eval_a", "eval_b", "evaluate");

  // oracle
  const std::vector<std::string> oracle_args{"oracle", "--data", data,   "--mode",
                                             "aware",  "--threshold", "0.4"};
  auto oracle_a = oracle_args;
  oracle_a.insert(oracle_a.end(), {"--out", out("oracle_a")});
  auto oracle_b = oracle_args;
  oracle_b.insert(oracle_b.end(), {"--out", out("oracle_b")});
  check.require(run_with_threads(oracle_a, "1") == 0, "oracle run failed");
  check.require(run_with_threads(oracle_b, "4") == 0, "oracle rerun failed");
  compare_dirs("oracle_a", "oracle_b", "oracle");
}

// ---- criterion 11: split contract ----

void criterion_split_contract(Check& check) {
  std::mt19937_64 rng(111);
  const char* labels[] = {"S18", "K18", "S19", "K19", "S20"};
  for (int trial = 0; trial < 50; ++trial) {
    const int n_seasons = 2 + static_cast<int>(rng() % 4);
    std::vector<ImageRecord> images;
    int serial = 0;
    for (int s = 0; s < n_seasons; ++s) {
      const int count = 2 + static_cast<int>(rng() % 25);
      for (int i = 0; i < count; ++i) {
        ImageRecord image = testutil::random_image(rng, "t" + std::to_string(trial) + "-" +
                                                            std::to_string(serial++));
        image.season = SeasonId::parse(labels[s]);
        images.push_back(std::move(image));
      }
    }
    const SeasonId target = SeasonId::parse(labels[n_seasons - 1]);
    const std::uint64_t seed = rng();

    const SeasonalSplit historic =
        build_split(images, target, SplitKind::historic, SplitRatios{}, seed);
    const SeasonalSplit present =
        build_split(images, target, SplitKind::present_aware, SplitRatios{}, seed);

    std::set<std::string> test_h;
    std::set<std::string> test_p;
    for (const auto& [id, role] : historic.assignment) {
      if (role == Role::test) test_h.insert(id);
    }
    for (const auto& [id, role] : present.assignment) {
      if (role == Role::test) test_p.insert(id);
    }
    check.require(test_h == test_p, "test manifests differ at trial " + std::to_string(trial));
    check.require(!test_h.empty(), "empty test set at trial " + std::to_string(trial));

    for (const ImageRecord& image : images) {
      for (const SeasonalSplit* split : {&historic, &present}) {
        const auto it = split->assignment.find(image.image_id);
        if (it == split->assignment.end()) continue;
        if (it->second == Role::test) {
          check.require(image.season == target, "test image outside the target season");
        } else if (split->kind == SplitKind::historic) {
          check.require(image.season < target, "historic dev image not strictly prior");
        } else {
          check.require(image.season <= target, "present-aware dev image after the target");
        }
      }
    }
  }
}

}  // namespace

int main() {
  Runner runner;
  runner.criterion(1, "effect-size oracle equivalence", criterion_effect_oracle, 1.0);
  runner.criterion(2, "complement law", criterion_complement_law);
  runner.criterion(3, "oracle monotonicity", criterion_oracle_monotonicity);
  runner.criterion(4, "oracle dominance", criterion_oracle_dominance);
  runner.criterion(5, "best-case AE equals dense-grid minimum", criterion_best_case);
  runner.criterion(6, "calibration sanity on the clean/noisy scenario",
                   criterion_calibration_sanity, 30.0);
  runner.criterion(7, "U-shaped MAE curve on the false-positive/missed-detection scenario",
                   criterion_ushape);
  runner.criterion(8, "present-aware calibration beats historic under drift", criterion_drift);
  runner.criterion(9, "heavy rejection reaches near-zero oracle MAE", criterion_heavy_rejection);
  runner.criterion(10, "byte-identical artifacts across reruns and thread counts",
                   criterion_determinism);
  runner.criterion(11, "split contract", criterion_split_contract);
  return runner.all_ok() ? 0 : 1;
}
