#include "rejgate/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>

#include <CLI11.hpp>

#include "rejgate/calibration.hpp"
#include "rejgate/data.hpp"
#include "rejgate/errors.hpp"
#include "rejgate/format.hpp"
#include "rejgate/oracle.hpp"
#include "rejgate/parallel.hpp"
#include "rejgate/rng.hpp"

namespace rejgate::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kTool = "reject-gate";
constexpr const char* kVersion = "0.1.0";

// ---------- small parsing helpers ----------

double parse_real(std::string_view text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw UsageError(what + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto token = text.substr(start, comma == std::string::npos ? comma : comma - start);
    values.push_back(parse_real(token, what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.empty()) throw UsageError(what + ": empty list");
  return values;
}

RejectionLevel parse_level(const std::string& text) {
  const std::vector<double> parts = parse_real_list(text, "--level");
  if (parts.size() != 2) {
    throw UsageError("--level expects 'conf,median', got '" + text + "'");
  }
  for (double v : parts) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw UsageError("--level values must lie in [0, 1], got '" + text + "'");
    }
  }
  return {parts[0], parts[1], LevelKind::absolute};
}

struct SplitRef {
  fs::path file;
  Role role = Role::val;
  std::string spec;   // as typed, for the manifest
  std::string label;  // file stem + role, for output names
};

SplitRef parse_split_ref(const std::string& text, Role default_role) {
  SplitRef ref;
  ref.spec = text;
  ref.role = default_role;
  std::string path_part = text;
  const auto colon = text.rfind(':');
  if (colon != std::string::npos) {
    const std::string suffix = text.substr(colon + 1);
    if (suffix == "train" || suffix == "val" || suffix == "test") {
      ref.role = parse_role(suffix);
      path_part = text.substr(0, colon);
    }
  }
  if (path_part.empty()) throw UsageError("--split expects FILE[:ROLE]");
  ref.file = path_part;
  ref.label = ref.file.stem().string() + "_" + std::string(to_string(ref.role));
  return ref;
}

unsigned env_threads() {
  const char* raw = std::getenv("REJECT_GATE_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;  // auto
  unsigned value = 0;
  const char* end = raw + std::string_view(raw).size();
  const auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("REJECT_GATE_THREADS must be a non-negative integer");
  }
  return value;
}

// ---------- file plumbing ----------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

std::string fnv1a64_digest(std::string_view bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

std::string digest_file(const fs::path& path) { return fnv1a64_digest(read_file(path)); }

// ---------- manifest ----------

std::string json_str(std::string_view text) { return nlohmann::json(text).dump(); }

std::string json_real_list(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ", ";
    out += fixed6(values[i]);
  }
  return out + "]";
}

std::string json_str_list(std::span<const std::string> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ", ";
    out += json_str(values[i]);
  }
  return out + "]";
}

// Every run writes exactly one of these next to its artifacts. Parameters
// deliberately exclude --out and the thread count: identical runs must yield
// identical manifests wherever they land and however they are scheduled.
struct Manifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> parameters;  // values pre-rendered as JSON
  std::vector<std::pair<std::string, std::string>> inputs;      // (path, digest)
  std::vector<std::pair<std::string, std::string>> outputs;     // (name, digest)

  void param(std::string key, std::string rendered) {
    parameters.emplace_back(std::move(key), std::move(rendered));
  }
  void input(const fs::path& path) { inputs.emplace_back(path.string(), digest_file(path)); }

  std::string render() const {
    std::string out = "{\n";
    out += "  \"tool\": " + json_str(kTool) + ",\n";
    out += "  \"version\": " + json_str(kVersion) + ",\n";
    out += "  \"subcommand\": " + json_str(subcommand) + ",\n";
    out += "  \"parameters\": {";
    for (std::size_t i = 0; i < parameters.size(); ++i) {
      out += i == 0 ? "\n" : ",\n";
      out += "    " + json_str(parameters[i].first) + ": " + parameters[i].second;
    }
    out += "\n  },\n";
    const auto render_refs = [&](const char* key,
                                 const std::vector<std::pair<std::string, std::string>>& refs,
                                 bool trailing_comma) {
      out += std::string("  \"") + key + "\": [";
      for (std::size_t i = 0; i < refs.size(); ++i) {
        out += i == 0 ? "\n" : ",\n";
        out += "    {\"path\": " + json_str(refs[i].first) +
               ", \"digest\": " + json_str(refs[i].second) + "}";
      }
      out += refs.empty() ? "]" : "\n  ]";
      out += trailing_comma ? ",\n" : "\n";
    };
    render_refs("inputs", inputs, true);
    render_refs("outputs", outputs, false);
    out += "}\n";
    return out;
  }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ValidationError("failed while writing " + path.string());
}

// Writes the named artifacts plus the manifest into out_dir.
void emit(const fs::path& out_dir, Manifest manifest,
          const std::vector<std::pair<std::string, std::string>>& files) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + out_dir.string());
  for (const auto& [name, content] : files) {
    write_file(out_dir / name, content);
    manifest.outputs.emplace_back(name, fnv1a64_digest(content));
  }
  write_file(out_dir / "manifest.json", manifest.render());
}

// ---------- dataset selection ----------

std::vector<ImageRecord> load_selection(const fs::path& data,
                                        const std::optional<SplitRef>& split) {
  std::vector<ImageRecord> images = load_dataset(data);
  if (split) {
    const SplitAssignment assignment = load_split_manifest(split->file);
    images = select_role(images, assignment, split->role);
  }
  if (images.empty()) {
    throw DegenerateError(split ? "split selection '" + split->spec + "' matches no images"
                                : "dataset " + data.string() + " contains no images");
  }
  return images;
}

// ---------- artifact emitters ----------

std::string sweep_csv(std::span<const SweepPoint> points) {
  std::string out = "threshold,mae,mae_lo,mae_hi,n_images\n";
  for (const SweepPoint& p : points) {
    out += fixed6(p.threshold) + ',' + fixed6(p.mae.point) + ',' + fixed6(p.mae.lo) + ',' +
           fixed6(p.mae.hi) + ',' + std::to_string(p.n_images) + '\n';
  }
  return out;
}

std::string median_sweep_csv(std::span<const MedianSweepPoint> points) {
  std::string out = "median,effect,effect_lo,effect_hi,rejected_fraction,n_accepted,n_rejected\n";
  for (const MedianSweepPoint& p : points) {
    out += fixed6(p.median) + ',';
    if (p.effect) {
      out += fixed6(p.effect->point) + ',' + fixed6(p.effect->lo) + ',' + fixed6(p.effect->hi);
    } else {
      out += ",,";
    }
    out += ',' + fixed6(p.rejected_fraction) + ',' + std::to_string(p.n_accepted) + ',' +
           std::to_string(p.n_rejected) + '\n';
  }
  return out;
}

std::string oracle_csv(const OracleCurve& curve) {
  std::string out = "fraction,mae,n_kept\n";
  for (const OraclePoint& p : curve.points) {
    out += fixed6(p.fraction) + ',' + fixed6(p.mae) + ',' + std::to_string(p.n_kept) + '\n';
  }
  return out;
}

std::string level_notation(const RejectionLevel& level, bool with_kind) {
  std::string out = "[" + compact6(level.conf_threshold) + ", " +
                    compact6(level.median_threshold) + "]";
  if (with_kind) {
    out += '_';
    out += to_string(level.kind).front();  // a, r, or g
  }
  return out;
}

const MedianSweepPoint& sweep_point_at(const CalibrationReport& report, double median) {
  for (const MedianSweepPoint& p : report.median_sweep) {
    if (p.median == median) return p;
  }
  throw std::logic_error("selected median missing from its own sweep");
}

std::string calibration_json(std::span<const CalibrationReport> reports,
                             std::span<const std::string> csv_names) {
  std::string out = "{\n  \"reports\": [";
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const CalibrationReport& report = reports[r];
    out += r == 0 ? "\n" : ",\n";
    out += "    {\n";
    out += "      \"conf_threshold\": " + fixed6(report.conf_threshold) + ",\n";
    out += "      \"is_global\": " + std::string(report.is_global ? "true" : "false") + ",\n";
    out += "      \"median_sweep_csv\": " + json_str(csv_names[r]) + ",\n";
    out += "      \"levels\": [";
    std::vector<const RejectionLevel*> levels;
    levels.push_back(&report.absolute);
    if (!report.is_global) levels.push_back(&report.relative);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const RejectionLevel& level = *levels[i];
      const MedianSweepPoint& point = sweep_point_at(report, level.median_threshold);
      out += i == 0 ? "\n" : ",\n";
      out += "        {\n";
      out += "          \"kind\": " + json_str(to_string(level.kind)) + ",\n";
      out += "          \"notation\": " + json_str(level_notation(level, true)) + ",\n";
      out += "          \"conf_threshold\": " + fixed6(level.conf_threshold) + ",\n";
      out += "          \"median_threshold\": " + fixed6(level.median_threshold) + ",\n";
      out += "          \"effect\": " + fixed6(point.effect->point) + ",\n";
      out += "          \"effect_lo\": " + fixed6(point.effect->lo) + ",\n";
      out += "          \"effect_hi\": " + fixed6(point.effect->hi) + ",\n";
      out += "          \"rejected_fraction\": " + fixed6(point.rejected_fraction) + ",\n";
      out += "          \"n_accepted\": " + std::to_string(point.n_accepted) + ",\n";
      out += "          \"n_rejected\": " + std::to_string(point.n_rejected) + "\n";
      out += "        }";
    }
    out += "\n      ]\n    }";
  }
  out += "\n  ]\n}\n";
  return out;
}

std::string evaluation_json(std::span<const LevelEvaluation> evaluations) {
  std::string out = "{\n  \"results\": [";
  for (std::size_t i = 0; i < evaluations.size(); ++i) {
    const LevelEvaluation& ev = evaluations[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\n";
    out += "      \"notation\": " + json_str(level_notation(ev.level, false)) + ",\n";
    out += "      \"conf_threshold\": " + fixed6(ev.level.conf_threshold) + ",\n";
    out += "      \"median_threshold\": " + fixed6(ev.level.median_threshold) + ",\n";
    out += "      \"mae\": " + fixed6(ev.mae.point) + ",\n";
    out += "      \"mae_lo\": " + fixed6(ev.mae.lo) + ",\n";
    out += "      \"mae_hi\": " + fixed6(ev.mae.hi) + ",\n";
    out += "      \"rejected_fraction\": " + fixed6(ev.rejected_fraction) + ",\n";
    out += "      \"n_accepted\": " + std::to_string(ev.n_accepted) + ",\n";
    out += "      \"n_rejected\": " + std::to_string(ev.n_rejected) + "\n";
    out += "    }";
  }
  out += "\n  ]\n}\n";
  return out;
}

// ---------- subcommand options ----------

struct SweepOpts {
  std::string data;
  std::string split;
  double grid_step = 0.01;
  int resamples = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

struct CalibrateOpts {
  std::string data;
  std::string split;
  std::string conf_threshold = "auto";
  double grid_step = 0.01;
  int resamples = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string empty_median = "zero";
  std::string out;
};

struct EvaluateOpts {
  std::string data;
  std::string split;
  std::vector<std::string> levels;
  int resamples = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string empty_median = "zero";
  std::string out;
};

struct OracleOpts {
  std::string data;
  std::vector<std::string> splits;
  std::string mode;
  double threshold = -1.0;
  bool threshold_set_given = false;
  bool threshold_given = false;
  std::string threshold_set;
  std::string fractions;
  std::string out;
};

struct SplitOpts {
  std::string data;
  std::string target_season;
  std::string kind;
  std::string ratios = "0.8,0.8";
  std::uint64_t seed = 0;
  std::string out;
};

struct GenerateOpts {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
};

BootstrapConfig make_bootstrap(int resamples, double alpha, std::uint64_t seed) {
  if (resamples < 1) throw UsageError("--bootstrap must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  return {resamples, alpha, seed};
}

EmptyMedianPolicy parse_empty_median(const std::string& text) {
  return text == "one" ? EmptyMedianPolicy::one : EmptyMedianPolicy::zero;
}

std::optional<SplitRef> optional_split(const std::string& text, Role default_role) {
  if (text.empty()) return std::nullopt;
  return parse_split_ref(text, default_role);
}

void add_split_param(Manifest& manifest, const std::optional<SplitRef>& split) {
  manifest.param("split", split ? json_str(split->spec) : "null");
}

// ---------- subcommands ----------

int cmd_sweep(const SweepOpts& opts, unsigned threads) {
  const auto split = optional_split(opts.split, Role::val);
  const std::vector<ImageRecord> images = load_selection(opts.data, split);
  const std::vector<double> grid = threshold_grid(opts.grid_step);
  const BootstrapConfig cfg = make_bootstrap(opts.resamples, opts.alpha, opts.seed);

  const std::vector<SweepPoint> points = sweep_confidence(images, grid, cfg, threads);
  const double optimal = optimal_confidence(points);

  Manifest manifest;
  manifest.subcommand = "sweep";
  manifest.param("data", json_str(opts.data));
  add_split_param(manifest, split);
  manifest.param("grid_step", fixed6(opts.grid_step));
  manifest.param("resamples", std::to_string(cfg.resamples));
  manifest.param("alpha", fixed6(cfg.alpha));
  manifest.param("seed", std::to_string(opts.seed));
  manifest.param("n_images", std::to_string(images.size()));
  manifest.param("optimal_threshold", fixed6(optimal));
  manifest.input(opts.data);
  if (split) manifest.input(split->file);

  emit(opts.out, std::move(manifest), {{"sweep.csv", sweep_csv(points)}});
  return 0;
}

int cmd_calibrate(const CalibrateOpts& opts, unsigned threads) {
  const auto split = optional_split(opts.split, Role::val);
  const std::vector<ImageRecord> images = load_selection(opts.data, split);
  const BootstrapConfig cfg = make_bootstrap(opts.resamples, opts.alpha, opts.seed);
  const std::vector<double> grid = threshold_grid(opts.grid_step);
  const EmptyMedianPolicy policy = parse_empty_median(opts.empty_median);

  std::vector<std::optional<double>> requested;
  if (opts.conf_threshold == "auto") {
    requested.push_back(std::nullopt);
  } else {
    for (double value : parse_real_list(opts.conf_threshold, "--conf-threshold")) {
      if (!(value >= 0.0 && value <= 1.0)) {
        throw UsageError("--conf-threshold values must lie in [0, 1]");
      }
      requested.emplace_back(value);
    }
  }

  std::vector<CalibrationReport> reports;
  std::vector<std::string> csv_names;
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<double> resolved;
  for (const auto& conf : requested) {
    CalibrationConfig run_cfg;
    run_cfg.conf_threshold = conf;
    run_cfg.conf_grid = grid;
    run_cfg.median_grid = grid;
    run_cfg.bootstrap = cfg;
    run_cfg.empty_median = policy;
    run_cfg.threads = threads;
    CalibrationReport report = calibrate(images, run_cfg);
    resolved.push_back(report.conf_threshold);
    std::string csv_name = "median_sweep_" + fixed6(report.conf_threshold) + ".csv";
    for (const auto& [existing, content] : files) {
      (void)content;
      if (existing == csv_name) {
        throw UsageError("--conf-threshold values must be distinct (saw " +
                         fixed6(report.conf_threshold) + " twice)");
      }
    }
    files.emplace_back(csv_name, median_sweep_csv(report.median_sweep));
    csv_names.push_back(std::move(csv_name));
    reports.push_back(std::move(report));
  }
  files.emplace_back("calibration.json", calibration_json(reports, csv_names));

  Manifest manifest;
  manifest.subcommand = "calibrate";
  manifest.param("data", json_str(opts.data));
  add_split_param(manifest, split);
  manifest.param("conf_threshold", opts.conf_threshold == "auto"
                                       ? json_str("auto")
                                       : json_real_list(std::vector<double>(
                                             resolved.begin(), resolved.end())));
  manifest.param("resolved_conf_thresholds", json_real_list(resolved));
  manifest.param("grid_step", fixed6(opts.grid_step));
  manifest.param("resamples", std::to_string(cfg.resamples));
  manifest.param("alpha", fixed6(cfg.alpha));
  manifest.param("seed", std::to_string(opts.seed));
  manifest.param("empty_median", json_str(opts.empty_median));
  manifest.param("n_images", std::to_string(images.size()));
  manifest.input(opts.data);
  if (split) manifest.input(split->file);

  emit(opts.out, std::move(manifest), files);
  return 0;
}

int cmd_evaluate(const EvaluateOpts& opts) {
  const auto split = optional_split(opts.split, Role::test);
  const std::vector<ImageRecord> images = load_selection(opts.data, split);
  const BootstrapConfig cfg = make_bootstrap(opts.resamples, opts.alpha, opts.seed);
  const EmptyMedianPolicy policy = parse_empty_median(opts.empty_median);

  std::vector<LevelEvaluation> evaluations;
  std::uint64_t level_index = 0;
  for (const std::string& text : opts.levels) {
    const RejectionLevel level = parse_level(text);
    BootstrapConfig level_cfg = cfg;
    level_cfg.seed = mix_seed(cfg.seed, level_index++);
    evaluations.push_back(evaluate_level(images, level, level_cfg, policy));
  }

  Manifest manifest;
  manifest.subcommand = "evaluate";
  manifest.param("data", json_str(opts.data));
  add_split_param(manifest, split);
  manifest.param("levels", json_str_list(opts.levels));
  manifest.param("resamples", std::to_string(cfg.resamples));
  manifest.param("alpha", fixed6(cfg.alpha));
  manifest.param("seed", std::to_string(opts.seed));
  manifest.param("empty_median", json_str(opts.empty_median));
  manifest.param("n_images", std::to_string(images.size()));
  manifest.input(opts.data);
  if (split) manifest.input(split->file);

  emit(opts.out, std::move(manifest), {{"evaluation.json", evaluation_json(evaluations)}});
  return 0;
}

int cmd_oracle(const OracleOpts& opts) {
  const OracleMode mode =
      opts.mode == "aware" ? OracleMode::confidence_aware : OracleMode::best_case;
  if (mode == OracleMode::confidence_aware && !opts.threshold_given) {
    throw UsageError("--mode aware requires --threshold");
  }
  if (mode == OracleMode::best_case && opts.threshold_given) {
    throw UsageError("--threshold applies only to --mode aware");
  }
  if (opts.threshold_set_given && mode != OracleMode::best_case) {
    throw UsageError("--threshold-set applies only to --mode best");
  }

  std::vector<double> fractions;
  if (opts.fractions.empty()) {
    for (int i = 0; i < 20; ++i) fractions.push_back(0.05 * i);
  } else {
    fractions = parse_real_list(opts.fractions, "--fractions");
  }
  std::vector<double> threshold_set;
  if (opts.threshold_set_given) {
    threshold_set = parse_real_list(opts.threshold_set, "--threshold-set");
    for (double t : threshold_set) {
      if (!(t >= 0.0 && t <= 1.0)) {
        throw UsageError("--threshold-set values must lie in [0, 1]");
      }
    }
  }

  std::vector<std::optional<SplitRef>> selections;
  if (opts.splits.empty()) {
    selections.push_back(std::nullopt);
  } else {
    for (const std::string& text : opts.splits) {
      selections.push_back(parse_split_ref(text, Role::test));
    }
  }

  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& split : selections) {
    const std::vector<ImageRecord> images = load_selection(opts.data, split);
    const OracleCurve curve = oracle_curve(
        images, mode, fractions,
        mode == OracleMode::confidence_aware ? std::optional<double>(opts.threshold)
                                             : std::nullopt,
        threshold_set);
    const std::string name =
        split ? "oracle_" + split->label + ".csv" : std::string("oracle.csv");
    for (const auto& [existing, content] : files) {
      (void)content;
      if (existing == name) {
        throw UsageError("--split selections must produce distinct output names (saw " + name +
                         " twice)");
      }
    }
    files.emplace_back(name, oracle_csv(curve));
  }

  Manifest manifest;
  manifest.subcommand = "oracle";
  manifest.param("data", json_str(opts.data));
  manifest.param("splits", json_str_list(opts.splits));
  manifest.param("mode", json_str(opts.mode));
  manifest.param("threshold", opts.threshold_given ? fixed6(opts.threshold) : "null");
  manifest.param("threshold_set",
                 opts.threshold_set_given ? json_real_list(threshold_set) : "null");
  manifest.param("fractions", json_real_list(fractions));
  manifest.input(opts.data);
  for (const auto& split : selections) {
    if (split) manifest.input(split->file);
  }

  emit(opts.out, std::move(manifest), files);
  return 0;
}

int cmd_split(const SplitOpts& opts) {
  const std::vector<ImageRecord> images = load_dataset(opts.data);
  const SeasonId target = SeasonId::parse(opts.target_season);
  const SplitKind kind =
      opts.kind == "historic" ? SplitKind::historic : SplitKind::present_aware;
  const std::vector<double> ratio_values = parse_real_list(opts.ratios, "--ratios");
  if (ratio_values.size() != 2) {
    throw UsageError("--ratios expects 'dev_of_current,train_of_dev'");
  }
  const SplitRatios ratios{ratio_values[0], ratio_values[1]};

  const SeasonalSplit split = build_split(images, target, kind, ratios, opts.seed);

  Manifest manifest;
  manifest.subcommand = "split";
  manifest.param("data", json_str(opts.data));
  manifest.param("target_season", json_str(opts.target_season));
  manifest.param("kind", json_str(opts.kind));
  manifest.param("dev_of_current", fixed6(ratios.dev_of_current));
  manifest.param("train_of_dev", fixed6(ratios.train_of_dev));
  manifest.param("seed", std::to_string(opts.seed));
  manifest.input(opts.data);

  emit(opts.out, std::move(manifest), {{"split.csv", split_to_csv(split)}});
  return 0;
}

int cmd_generate(const GenerateOpts& opts) {
  GeneratorConfig cfg = GeneratorConfig::load(opts.config);
  if (opts.seed_given) cfg.seed = opts.seed;
  const std::vector<ImageRecord> images = generate_synthetic(cfg);

  Manifest manifest;
  manifest.subcommand = "generate";
  manifest.param("config", json_str(opts.config));
  manifest.param("seed_override", opts.seed_given ? std::to_string(opts.seed) : "null");
  manifest.param("effective_seed", std::to_string(cfg.seed));
  manifest.param("n_images", std::to_string(images.size()));
  manifest.input(opts.config);

  emit(opts.out, std::move(manifest), {{"dataset.jsonl", to_jsonl(images)}});
  return 0;
}

}  // namespace

LevelEvaluation evaluate_level(std::span<const ImageRecord> images, const RejectionLevel& level,
                               const BootstrapConfig& cfg, EmptyMedianPolicy policy) {
  if (images.empty()) throw ValidationError("evaluation over an empty dataset");
  if (!(level.conf_threshold >= 0.0 && level.conf_threshold <= 1.0) ||
      !(level.median_threshold >= 0.0 && level.median_threshold <= 1.0)) {
    throw UsageError("rejection level values must lie in [0, 1]");
  }
  std::vector<double> accepted_errors;
  accepted_errors.reserve(images.size());
  for (const ImageRecord& image : images) {
    const GateDecision decision = gate(image, level, policy);
    if (decision.accepted) {
      accepted_errors.push_back(
          static_cast<double>(std::abs(decision.surviving_count - image.gt_count)));
    }
  }
  if (accepted_errors.empty()) {
    throw DegenerateError("level " + level_notation(level, false) +
                          " rejects every image; its accepted-set MAE is undefined");
  }
  LevelEvaluation evaluation;
  evaluation.level = level;
  evaluation.mae = bootstrap_mean_ci(accepted_errors, cfg);
  evaluation.n_accepted = static_cast<int>(accepted_errors.size());
  evaluation.n_rejected = static_cast<int>(images.size() - accepted_errors.size());
  evaluation.rejected_fraction =
      static_cast<double>(evaluation.n_rejected) / static_cast<double>(images.size());
  return evaluation;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back(kTool);
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const std::string& s : argv_storage) argv.push_back(s.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Confidence-based sample rejection for detection-driven counting"};
  app.require_subcommand(1);

  SweepOpts sweep_opts;
  auto* sweep = app.add_subcommand(
      "sweep", "MAE across a box-confidence threshold grid, with bootstrap intervals");
  sweep->add_option("--data", sweep_opts.data, "dataset JSONL")->required();
  sweep->add_option("--split", sweep_opts.split, "split manifest FILE[:ROLE], default role val");
  sweep->add_option("--grid-step", sweep_opts.grid_step, "threshold grid step");
  sweep->add_option("--bootstrap", sweep_opts.resamples, "bootstrap resamples");
  sweep->add_option("--alpha", sweep_opts.alpha, "interval coverage complement");
  sweep->add_option("--seed", sweep_opts.seed, "bootstrap seed");
  sweep->add_option("--out", sweep_opts.out, "output directory")->required();

  CalibrateOpts calibrate_opts;
  auto* calibrate_cmd = app.add_subcommand(
      "calibrate", "Select absolute/relative rejection levels from a median-cutoff sweep");
  calibrate_cmd->add_option("--data", calibrate_opts.data, "dataset JSONL")->required();
  calibrate_cmd->add_option("--split", calibrate_opts.split,
                            "split manifest FILE[:ROLE], default role val");
  calibrate_cmd->add_option("--conf-threshold", calibrate_opts.conf_threshold,
                            "'auto' or comma-separated confidence thresholds");
  calibrate_cmd->add_option("--grid-step", calibrate_opts.grid_step, "grid step for both sweeps");
  calibrate_cmd->add_option("--bootstrap", calibrate_opts.resamples, "bootstrap resamples");
  calibrate_cmd->add_option("--alpha", calibrate_opts.alpha, "interval coverage complement");
  calibrate_cmd->add_option("--seed", calibrate_opts.seed, "bootstrap seed");
  calibrate_cmd
      ->add_option("--empty-median", calibrate_opts.empty_median,
                   "median for images with no surviving boxes")
      ->check(CLI::IsMember({"zero", "one"}));
  calibrate_cmd->add_option("--out", calibrate_opts.out, "output directory")->required();

  EvaluateOpts evaluate_opts;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Apply fixed rejection levels and report accepted-set MAE");
  evaluate_cmd->add_option("--data", evaluate_opts.data, "dataset JSONL")->required();
  evaluate_cmd->add_option("--split", evaluate_opts.split,
                           "split manifest FILE[:ROLE], default role test");
  evaluate_cmd->add_option("--level", evaluate_opts.levels, "rejection level 'conf,median'")
      ->required()
      ->take_all();
  evaluate_cmd->add_option("--bootstrap", evaluate_opts.resamples, "bootstrap resamples");
  evaluate_cmd->add_option("--alpha", evaluate_opts.alpha, "interval coverage complement");
  evaluate_cmd->add_option("--seed", evaluate_opts.seed, "bootstrap seed");
  evaluate_cmd
      ->add_option("--empty-median", evaluate_opts.empty_median,
                   "median for images with no surviving boxes")
      ->check(CLI::IsMember({"zero", "one"}));
  evaluate_cmd->add_option("--out", evaluate_opts.out, "output directory")->required();

  OracleOpts oracle_opts;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "Lower-bound oracle rejector curves over rejected fractions");
  oracle_cmd->add_option("--data", oracle_opts.data, "dataset JSONL")->required();
  oracle_cmd
      ->add_option("--split", oracle_opts.splits,
                   "split manifest FILE[:ROLE], default role test; repeatable")
      ->take_all();
  oracle_cmd->add_option("--mode", oracle_opts.mode, "aware or best")
      ->required()
      ->check(CLI::IsMember({"aware", "best"}));
  auto* threshold_opt =
      oracle_cmd->add_option("--threshold", oracle_opts.threshold, "confidence threshold (aware)");
  auto* threshold_set_opt = oracle_cmd->add_option(
      "--threshold-set", oracle_opts.threshold_set,
      "restrict best-case candidate thresholds to this comma-separated list");
  oracle_cmd->add_option("--fractions", oracle_opts.fractions,
                         "comma-separated rejected fractions in [0, 1); default 0,0.05,...,0.95");
  oracle_cmd->add_option("--out", oracle_opts.out, "output directory")->required();

  SplitOpts split_opts;
  auto* split_cmd =
      app.add_subcommand("split", "Build a historic or present-aware seasonal split manifest");
  split_cmd->add_option("--data", split_opts.data, "dataset JSONL")->required();
  split_cmd->add_option("--target-season", split_opts.target_season, "season under test, e.g. K19")
      ->required();
  split_cmd->add_option("--kind", split_opts.kind, "historic or present")
      ->required()
      ->check(CLI::IsMember({"historic", "present"}));
  split_cmd->add_option("--ratios", split_opts.ratios, "'dev_of_current,train_of_dev'");
  split_cmd->add_option("--seed", split_opts.seed, "shuffle seed");
  split_cmd->add_option("--out", split_opts.out, "output directory")->required();

  GenerateOpts generate_opts;
  auto* generate_cmd = app.add_subcommand("generate", "Generate a synthetic dataset JSONL");
  generate_cmd->add_option("--config", generate_opts.config, "generator config JSON")->required();
  auto* gen_seed_opt =
      generate_cmd->add_option("--seed", generate_opts.seed, "override the config seed");
  generate_cmd->add_option("--out", generate_opts.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  oracle_opts.threshold_given = threshold_opt->count() > 0;
  oracle_opts.threshold_set_given = threshold_set_opt->count() > 0;
  generate_opts.seed_given = gen_seed_opt->count() > 0;

  try {
    const unsigned threads = resolve_threads(env_threads());
    if (sweep->parsed()) return cmd_sweep(sweep_opts, threads);
    if (calibrate_cmd->parsed()) return cmd_calibrate(calibrate_opts, threads);
    if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate_opts);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_opts);
    if (split_cmd->parsed()) return cmd_split(split_opts);
    if (generate_cmd->parsed()) return cmd_generate(generate_opts);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace rejgate::cli
