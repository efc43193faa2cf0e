// Copyright 2026 The hoirobust Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hoirobust/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hoirobust/bench_filter.hpp"
#include "hoirobust/cma.hpp"
#include "hoirobust/error_analysis.hpp"
#include "hoirobust/evaluator.hpp"
#include "hoirobust/f4m.hpp"
#include "hoirobust/json_io.hpp"
#include "hoirobust/parallel.hpp"
#include "hoirobust/robustness.hpp"
#include "hoirobust/svg.hpp"

namespace hoirobust::cli {
namespace {

namespace fs = std::filesystem;

enum class LogLevel { kError, kWarn, kInfo, kDebug };

class Logger {
 public:
  Logger(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
  void warn(const std::string& m) const { emit(LogLevel::kWarn, "warn", m); }
  void info(const std::string& m) const { emit(LogLevel::kInfo, "info", m); }
  void debug(const std::string& m) const { emit(LogLevel::kDebug, "debug", m); }

 private:
  void emit(LogLevel l, const char* tag, const std::string& m) const {
    if (l <= level_) err_ << '[' << tag << "] " << m << '\n';
  }
  std::ostream& err_;
  LogLevel level_;
};

LogLevel parse_log_level(const std::string& s) {
  if (s == "error") return LogLevel::kError;
  if (s == "warn") return LogLevel::kWarn;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  throw ConfigError("unknown log level '" + s + "'");
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

fs::path sibling(const fs::path& out, const std::string& extension) {
  fs::path p = out;
  p.replace_extension(extension);
  return p;
}

struct Common {
  unsigned workers = 0;
  std::string log_level = "warn";
  std::vector<std::string> argv;
};

nlohmann::json envelope(const std::string& subcommand, const Common& common, nlohmann::json config) {
  config["subcommand"] = subcommand;
  config["workers"] = common.workers;
  config["log_level"] = common.log_level;
  return {{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}, {"config", std::move(config)}};
}

/// Timestamps live in a sidecar so the report itself stays byte-stable.
void write_meta(const fs::path& path, const Common& common) {
  write_json_file(path, {{"generated_at", utc_now()}, {"tool_version", kToolVersion}, {"argv", common.argv}});
}

void write_report(const fs::path& out, const nlohmann::json& report, const Common& common) {
  write_json_file(out, report);
  write_meta(sibling(out, ".meta.json"), common);
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string dataset;
  std::string detections;
  std::string setting = "default";
  double iou = 0.5;
  std::string out;
  std::string csv;
};

int cmd_evaluate(const EvaluateArgs& a, const Common& common, std::ostream& out, const Logger& log) {
  eval::EvalOptions opts;
  opts.setting = eval::parse_setting(a.setting);
  opts.iou_threshold = a.iou;
  opts.workers = common.workers;
  if (!(a.iou >= 0.0 && a.iou < 1.0)) throw ConfigError("--iou must lie in [0, 1)");
  const DatasetIndex ds = load_dataset(a.dataset);
  const DetectionSet dets = load_detections(a.detections, ds);
  log.info("evaluating " + std::to_string(dets.total()) + " detections on " + std::to_string(ds.images.size()) +
           " images");
  const eval::EvalReport rep = eval::evaluate(ds, dets, opts);

  const fs::path csv = a.csv.empty() ? sibling(a.out, ".csv") : fs::path(a.csv);
  nlohmann::json report = envelope("evaluate", common,
                                   {{"dataset", a.dataset},
                                    {"detections", a.detections},
                                    {"setting", eval::to_string(opts.setting)},
                                    {"iou_threshold", a.iou},
                                    {"out", a.out},
                                    {"csv", csv.string()}});
  report["method"] = dets.method;
  report["domain"] = dets.domain;
  report["report"] = eval::to_json(rep);
  write_report(a.out, report, common);
  write_text(csv, eval::to_csv(rep, ds.categories));

  out << "setting " << eval::to_string(opts.setting) << ", IoU > " << fixed(a.iou, 2) << "\n";
  out << pad("mAP (full)", 16) << fixed(rep.map_full, 3) << "  [" << rep.scored_categories << " categories]\n";
  out << pad("mAP (rare)", 16) << fixed(rep.map_rare, 3) << "  [" << rep.rare_categories << " categories]\n";
  out << pad("mAP (non-rare)", 16) << fixed(rep.map_nonrare, 3) << "  [" << rep.nonrare_categories
      << " categories]\n";
  if (!rep.excluded_categories.empty()) {
    out << rep.excluded_categories.size() << " categories without ground truth were excluded\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct RobustnessArgs {
  std::string pairs;
  std::optional<double> mean_rr;
  std::string out;
  std::string svg;
};

int cmd_robustness(const RobustnessArgs& a, const Common& common, std::ostream& out, const Logger& log) {
  const auto pairs = robustness::parse_pairs(read_json_file(a.pairs));
  log.info("scoring " + std::to_string(pairs.size()) + " methods");
  const robustness::FleetReport fleet = robustness::fleet_report(pairs, a.mean_rr);

  const fs::path svg_path = a.svg.empty() ? sibling(a.out, ".svg") : fs::path(a.svg);
  nlohmann::json cfg{{"pairs", a.pairs}, {"out", a.out}, {"svg", svg_path.string()}};
  cfg["mean_rr"] = a.mean_rr ? nlohmann::json(*a.mean_rr) : nlohmann::json(nullptr);
  nlohmann::json report = envelope("robustness", common, std::move(cfg));
  report["report"] = robustness::to_json(fleet);
  write_report(a.out, report, common);

  std::vector<svg::Point> points;
  for (const auto& m : fleet.methods) points.push_back({m.method, m.map_h, m.map_r});
  write_text(svg_path, svg::scatter(points, {"Robustness: shifted vs. original mAP", "mAP on original images",
                                             "mAP on shifted images", fleet.mean_rr}));

  std::size_t width = 8;
  for (const auto& m : fleet.methods) width = std::max(width, m.method.size() + 2);
  out << pad("method", width) << pad("mAP_H", 8) << pad("mAP_R", 8) << pad("RR", 7) << pad("RRM(%)", 8)
      << "printed\n";
  for (const auto& m : fleet.methods) {
    out << pad(m.method, width) << pad(fixed(m.map_h, 2), 8) << pad(fixed(m.map_r, 2), 8) << pad(fixed(m.rr, 3), 7)
        << pad(fixed(100.0 * fleet.rrm_of(m.method), 1), 8)
        << (m.printed_rrm_pp ? fixed(*m.printed_rrm_pp, 1) : std::string("-")) << "\n";
  }
  out << "mean RR " << fixed(fleet.mean_rr, 4) << (fleet.mean_overridden ? " (pinned)" : " (fleet)") << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct ErrorsArgs {
  std::string dataset;
  std::string detections;
  std::string setting = "default";
  double iou = 0.5;
  std::string out;
  std::string compare;
  std::string svg;
};

int cmd_errors(const ErrorsArgs& a, const Common& common, std::ostream& out, const Logger& log) {
  errors::BreakdownOptions opts;
  opts.setting = eval::parse_setting(a.setting);
  opts.iou_threshold = a.iou;
  opts.workers = common.workers;
  if (!(a.iou >= 0.0 && a.iou < 1.0)) throw ConfigError("--iou must lie in [0, 1)");
  const DatasetIndex ds = load_dataset(a.dataset);
  const DetectionSet dets = load_detections(a.detections, ds);
  const errors::ErrorBreakdown b = errors::breakdown(ds, dets, opts);
  log.info(std::to_string(b.total_fp) + " false positives attributed");

  std::optional<errors::ErrorBreakdown> other;
  if (!a.compare.empty()) {
    const auto doc = read_json_file(a.compare);
    other = errors::breakdown_from_json(doc.contains("breakdown") ? doc.at("breakdown") : doc);
  }

  const fs::path svg_path = a.svg.empty() ? sibling(a.out, ".svg") : fs::path(a.svg);
  nlohmann::json report = envelope("errors", common,
                                   {{"dataset", a.dataset},
                                    {"detections", a.detections},
                                    {"setting", eval::to_string(opts.setting)},
                                    {"iou_threshold", a.iou},
                                    {"compare", a.compare.empty() ? nlohmann::json(nullptr) : nlohmann::json(a.compare)},
                                    {"out", a.out},
                                    {"svg", svg_path.string()}});
  report["method"] = dets.method;
  report["domain"] = dets.domain;
  report["breakdown"] = errors::to_json(b);
  std::optional<errors::DeltaTable> delta;
  if (other) {
    // Positive deltas mean this run has the larger share.
    delta = errors::compare_domains(*other, b);
    report["compare_breakdown"] = errors::to_json(*other);
    report["delta"] = errors::to_json(*delta);
  }
  write_report(a.out, report, common);

  std::vector<std::string> names;
  svg::Series mine{dets.domain.empty() ? "this run" : dets.domain, {}};
  svg::Series theirs{"compared", {}};
  for (const auto t : errors::all_error_types()) {
    names.emplace_back(errors::to_string(t));
    mine.values.push_back(b.percentage(t));
    if (other) theirs.values.push_back(other->percentage(t));
  }
  std::vector<svg::Series> series;
  if (other) series.push_back(theirs);
  series.push_back(mine);
  write_text(svg_path, svg::bar_chart(names, series, {"False-positive breakdown", "share of false positives (%)"}));

  out << pad("type", 18) << pad("count", 8) << pad("share(%)", 10) << (other ? "delta(pp)" : "") << "\n";
  for (const auto t : errors::all_error_types()) {
    out << pad(errors::to_string(t), 18) << pad(std::to_string(b.count(t)), 8) << pad(fixed(b.percentage(t), 1), 10);
    if (delta) {
      const auto& d = delta->delta_pp[static_cast<std::size_t>(t)];
      out << (d ? fixed(*d, 1) : std::string("n/a"));
    }
    out << "\n";
  }
  out << "false positives " << b.total_fp << ", missed ground truths " << b.missed_gt << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string dataset;
  std::string images;
  std::string specs;
  std::string mix = "on";
  std::string pairing = "both";
  double alpha = 1.5;
  double pi_c = 0.3;
  int patch = 32;
  std::uint64_t seed = 7;
  std::size_t count = 0;
  int severity = 3;
  std::string out;
};

int cmd_augment(const AugmentArgs& a, const Common& common, std::ostream& out, const Logger& log) {
  cma::MixupConfig cfg;
  cfg.alpha = a.alpha;
  cfg.pi_c = a.pi_c;
  cfg.patch_size = a.patch;
  cfg.seed = a.seed;
  cfg.validate();
  cma::AugmentOptions opts;
  if (a.mix != "on" && a.mix != "off") throw ConfigError("--mix must be on or off");
  opts.mix = a.mix == "on";
  opts.pairing = cma::parse_pairing(a.pairing);
  opts.count = a.count;
  opts.workers = common.workers;
  const std::vector<cma::CorruptionSpec> specs =
      a.specs.empty() ? cma::default_specs(a.severity) : cma::parse_specs(read_json_file(a.specs));
  const DatasetIndex ds = load_dataset(a.dataset);
  log.info("synthesising with " + std::to_string(specs.size()) + " corruption specs");
  const cma::AugmentSummary summary = cma::build_augmented_dataset(ds, a.images, specs, cfg, opts, a.out);
  for (const auto& f : summary.failures) log.warn(f);

  nlohmann::json spec_list = nlohmann::json::array();
  for (const auto& s : specs) spec_list.push_back(s.label());
  nlohmann::json report = envelope("augment", common,
                                   {{"dataset", a.dataset},
                                    {"images", a.images},
                                    {"specs", a.specs.empty() ? nlohmann::json(nullptr) : nlohmann::json(a.specs)},
                                    {"resolved_specs", spec_list},
                                    {"mix", opts.mix},
                                    {"pairing", cma::to_string(opts.pairing)},
                                    {"alpha", cfg.alpha},
                                    {"pi_c", cfg.pi_c},
                                    {"patch", cfg.patch_size},
                                    {"seed", cfg.seed},
                                    {"count", opts.count},
                                    {"out", a.out}});
  report["emitted"] = summary.emitted;
  report["failures"] = summary.failures;
  write_report(fs::path(a.out) / "augment_report.json", report, common);

  out << "emitted " << summary.emitted << " samples to " << a.out << "\n";
  if (!summary.failures.empty()) out << summary.failures.size() << " samples failed (see provenance.json)\n";
  return summary.emitted == 0 && !summary.failures.empty() ? kDataError : kOk;
}

// ---------------------------------------------------------------------------

struct FilterArgs {
  std::string manifest;
  std::string dataset;
  std::string vl_scores;
  std::vector<std::string> detections;
  std::string exclude;
  double tau_vl = 0.25;
  double tau_f1 = 0.5;
  double iou = 0.5;
  double min_area = 0.005;
  std::vector<std::string> order{"vl", "consistency", "small_object"};
  std::string out;
  std::string manifest_out;
};

int cmd_filter(const FilterArgs& a, const Common& common, std::ostream& out, const Logger& log) {
  filter::FilterOptions opts;
  opts.thresholds = {a.tau_vl, a.iou, a.tau_f1, a.min_area};
  opts.order.clear();
  for (const auto& s : a.order) opts.order.push_back(filter::parse_stage(s));
  opts.workers = common.workers;
  opts.thresholds.validate();

  const DomainManifest manifest = load_manifest(a.manifest);
  const DatasetIndex ds = load_dataset(a.dataset);
  filter::FilterScores scores;
  if (!a.vl_scores.empty()) scores.vl = filter::parse_vl_scores(read_json_file(a.vl_scores));
  if (!a.detections.empty()) {
    scores.detections.emplace();
    for (std::size_t i = 0; i < a.detections.size(); ++i) {
      auto [domain, dets] = filter::parse_detection_file(read_json_file(a.detections[i]));
      if (i == 0) scores.base_domain = domain;
      if (!scores.detections->emplace(domain, std::move(dets)).second) {
        throw InvariantError("two detection files claim domain '" + domain + "'");
      }
    }
  }
  std::set<ImageId> exclusions;
  if (!a.exclude.empty()) {
    std::ifstream in(a.exclude);
    if (!in) throw ParseError("cannot open " + a.exclude);
    exclusions = filter::parse_exclusions(in);
  }
  if (!scores.vl) log.warn("no VL scores given; the vl stage is skipped");
  if (!scores.detections) log.warn("no detections given; the consistency stage is skipped");

  const filter::FilterDecision decision = filter::apply_filters(manifest, ds, scores, exclusions, opts);
  const fs::path manifest_out = a.manifest_out.empty() ? sibling(a.out, ".manifest.json") : fs::path(a.manifest_out);
  nlohmann::json report = envelope("filter", common,
                                   {{"manifest", a.manifest},
                                    {"dataset", a.dataset},
                                    {"vl_scores", a.vl_scores.empty() ? nlohmann::json(nullptr) : nlohmann::json(a.vl_scores)},
                                    {"detections", a.detections},
                                    {"base_domain", scores.base_domain},
                                    {"exclude", a.exclude.empty() ? nlohmann::json(nullptr) : nlohmann::json(a.exclude)},
                                    {"out", a.out},
                                    {"manifest_out", manifest_out.string()}});
  report["decision"] = filter::to_json(decision, opts);
  write_report(a.out, report, common);
  write_json_file(manifest_out, to_json(decision.manifest));

  const auto& by_reason = report["decision"]["counts"]["by_reason"];
  out << "kept " << decision.kept.size() << " of " << decision.kept.size() + decision.discarded.size()
      << " base samples\n";
  for (const auto& [reason, n] : by_reason.items()) out << "  " << pad(reason, 14) << n.get<std::size_t>() << "\n";
  for (const auto& id : decision.unknown_exclusions) log.warn("excluded id '" + id + "' is not in the manifest");
  return kOk;
}

// ---------------------------------------------------------------------------

struct F4MArgs {
  f4m::F4MConfig cfg;
  std::string grid = "2x2";
  std::string vfm_tokens;
  std::string out;
};

int cmd_f4m(F4MArgs a, const Common& common, std::ostream& out, const Logger& log) {
  f4m::parse_grid(a.grid, a.cfg);
  std::optional<f4m::VfmOutput> external;
  if (!a.vfm_tokens.empty()) external = f4m::parse_vfm_tokens(read_json_file(a.vfm_tokens));
  const f4m::F4MCheckReport rep = f4m::f4m_check(a.cfg, external);

  nlohmann::json cfg = f4m::to_json(a.cfg);
  cfg["vfm_tokens"] = a.vfm_tokens.empty() ? nlohmann::json(nullptr) : nlohmann::json(a.vfm_tokens);
  cfg["out"] = a.out;
  nlohmann::json report = envelope("f4m-check", common, std::move(cfg));
  report["report"] = f4m::to_json(rep);
  write_report(a.out, report, common);

  if (rep.config_error) {
    out << "configuration error: " << *rep.config_error << "\n";
    return kConfigError;
  }
  for (const auto& c : rep.checks) {
    out << pad(c.name, 30) << (c.passed ? "PASS" : "FAIL") << "\n";
    log.debug(c.name + " " + c.measured.dump());
  }
  out << (rep.passed() ? "all invariants hold" : "invariant violated") << "\n";
  return rep.passed() ? kOk : kInternalError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robustness toolkit for human-object interaction detectors", "hoirobust"};
  app.set_version_flag("--version", std::string("hoirobust ") + kToolVersion + " (schema " + kSchemaVersion + ")");
  app.require_subcommand(1);

  Common common;
  common.argv = args;
  app.add_option("--workers", common.workers, "Worker threads (default: $HOIROBUST_WORKERS or all cores)");
  app.add_option("--log-level", common.log_level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Triplet mAP of a detection file");
  evaluate->add_option("--dataset", ev.dataset)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--detections", ev.detections)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--setting", ev.setting, "default or ko")->capture_default_str();
  evaluate->add_option("--iou", ev.iou)->capture_default_str();
  evaluate->add_option("--out", ev.out)->required();
  evaluate->add_option("--csv", ev.csv, "Per-category AP table (default: <out>.csv)");

  RobustnessArgs rb;
  auto* robust = app.add_subcommand("robustness", "RR and RRM from (original, shifted) mAP pairs");
  robust->add_option("--pairs", rb.pairs)->required()->check(CLI::ExistingFile);
  robust->add_option("--mean-rr", rb.mean_rr, "Pin the fleet mean RR");
  robust->add_option("--out", rb.out)->required();
  robust->add_option("--svg", rb.svg, "Scatter plot (default: <out>.svg)");

  ErrorsArgs er;
  auto* errs = app.add_subcommand("errors", "False-positive breakdown");
  errs->add_option("--dataset", er.dataset)->required()->check(CLI::ExistingFile);
  errs->add_option("--detections", er.detections)->required()->check(CLI::ExistingFile);
  errs->add_option("--setting", er.setting)->capture_default_str();
  errs->add_option("--iou", er.iou)->capture_default_str();
  errs->add_option("--out", er.out)->required();
  errs->add_option("--compare", er.compare, "Breakdown JSON of the reference domain")->check(CLI::ExistingFile);
  errs->add_option("--svg", er.svg, "Bar chart (default: <out>.svg)");

  AugmentArgs au;
  auto* augment = app.add_subcommand("augment", "Synthesise and mix cross-domain training samples");
  augment->add_option("--dataset", au.dataset)->required()->check(CLI::ExistingFile);
  augment->add_option("--images", au.images)->required()->check(CLI::ExistingDirectory);
  augment->add_option("--specs", au.specs, "Corruption list (default: every kind)")->check(CLI::ExistingFile);
  augment->add_option("--severity", au.severity, "Severity when --specs is absent")->capture_default_str();
  augment->add_option("--mix", au.mix, "on or off")->capture_default_str();
  augment->add_option("--pairing", au.pairing, "original-synthetic, cross-synthetic or both")->capture_default_str();
  augment->add_option("--alpha", au.alpha)->capture_default_str();
  augment->add_option("--pi-c", au.pi_c)->capture_default_str();
  augment->add_option("--patch", au.patch)->capture_default_str();
  augment->add_option("--seed", au.seed)->capture_default_str();
  augment->add_option("--count", au.count, "Mixed samples (0: one per image)")->capture_default_str();
  augment->add_option("--out", au.out)->required();

  FilterArgs fl;
  auto* filt = app.add_subcommand("filter", "Benchmark sample filtering");
  filt->add_option("--manifest", fl.manifest)->required()->check(CLI::ExistingFile);
  filt->add_option("--dataset", fl.dataset)->required()->check(CLI::ExistingFile);
  filt->add_option("--vl-scores", fl.vl_scores)->check(CLI::ExistingFile);
  filt->add_option("--detections", fl.detections, "Base-domain file first")
      ->delimiter(',')
      ->check(CLI::ExistingFile);
  filt->add_option("--exclude", fl.exclude)->check(CLI::ExistingFile);
  filt->add_option("--tau-vl", fl.tau_vl)->capture_default_str();
  filt->add_option("--tau-f1", fl.tau_f1)->capture_default_str();
  filt->add_option("--iou", fl.iou)->capture_default_str();
  filt->add_option("--min-area", fl.min_area)->capture_default_str();
  filt->add_option("--stage-order", fl.order, "Automatic stage order")->delimiter(',');
  filt->add_option("--out", fl.out)->required();
  filt->add_option("--manifest-out", fl.manifest_out, "Filtered manifest (default: <out>.manifest.json)");

  F4MArgs fm;
  auto* f4m_cmd = app.add_subcommand("f4m-check", "Token-fusion invariant suite");
  f4m_cmd->add_option("--query-type", fm.cfg.query_type)->capture_default_str();
  f4m_cmd->add_option("--grid", fm.grid)->capture_default_str();
  f4m_cmd->add_option("--pi-f", fm.cfg.pi_f)->capture_default_str();
  f4m_cmd->add_option("--seed", fm.cfg.seed)->capture_default_str();
  f4m_cmd->add_option("--d-model", fm.cfg.d_model)->capture_default_str();
  f4m_cmd->add_option("--num-vfms", fm.cfg.num_vfms)->capture_default_str();
  f4m_cmd->add_option("--patch-grid", fm.cfg.patch_grid)->capture_default_str();
  f4m_cmd->add_option("--vfm-dim", fm.cfg.vfm_dim)->capture_default_str();
  f4m_cmd->add_flag("--training", fm.cfg.training);
  f4m_cmd->add_option("--vfm-tokens", fm.vfm_tokens)->check(CLI::ExistingFile);
  f4m_cmd->add_option("--out", fm.out)->required();

  std::vector<std::string> argv_store{"hoirobust"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kConfigError;
  }

  try {
    if (common.workers == 0) common.workers = default_worker_count();
    const Logger log(err, parse_log_level(common.log_level));
    if (evaluate->parsed()) return cmd_evaluate(ev, common, out, log);
    if (robust->parsed()) return cmd_robustness(rb, common, out, log);
    if (errs->parsed()) return cmd_errors(er, common, out, log);
    if (augment->parsed()) return cmd_augment(au, common, out, log);
    if (filt->parsed()) return cmd_filter(fl, common, out, log);
    if (f4m_cmd->parsed()) return cmd_f4m(fm, common, out, log);
    err << app.help();
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace hoirobust::cli
