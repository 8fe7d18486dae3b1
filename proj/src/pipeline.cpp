#include "fvc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <set>

#include <fmt/format.h>

#include "fvc/error.hpp"
#include "fvc/plots.hpp"
#include "json.hpp"
#include "text_io.hpp"

namespace fvc {

namespace {

using nlohmann::json;

constexpr std::string_view kKnownKeys[] = {
    "manifest",   "embeddings",   "systems",   "K",    "bandwidth_rule",
    "clip",       "ds_exclusion", "ece_grid",  "output_dir", "seed",
    "synth",      "group_mean",   "floor_cohort_std"};

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorKind::kArgument, "config: " + msg);
}

template <typename T>
T get_as(const json& j, std::string_view key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error(fmt::format("'{}' has the wrong type", key));
  }
}

std::filesystem::path resolve_path(const json& j, std::string_view key,
                                   const std::filesystem::path& base) {
  const std::filesystem::path p = get_as<std::string>(j, key);
  return p.is_absolute() || base.empty() ? p : base / p;
}

void read_synth(const json& j, SynthConfig& s) {
  if (!j.is_object()) config_error("'synth' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "n_speakers") s.n_speakers = get_as<int>(value, key);
    else if (key == "n_train_speakers") s.n_train_speakers = get_as<int>(value, key);
    else if (key == "sessions_per_speaker") s.sessions_per_speaker = get_as<int>(value, key);
    else if (key == "dim") s.dim = get_as<int>(value, key);
    else if (key == "noise_scale") s.noise_scale = get_as<double>(value, key);
    else if (key == "channel_offset") s.channel_offset = get_as<double>(value, key);
    else config_error(fmt::format("unknown key 'synth.{}'", key));
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

json bandwidth_summary(const std::vector<double>& h) {
  if (h.empty()) return nullptr;
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  return {{"min", *lo}, {"median", median_of(h)}, {"max", *hi}};
}

std::string metadata_json(const RunConfig& config, SystemTag tag,
                          const LooCalibration& cal) {
  const json meta = {
      {"system", std::string(to_string(tag))},
      {"kernel", "gaussian"},
      {"bandwidth_rule", config.bandwidth_rule},
      {"log10_lr_clip", {-config.log10_lr_clip, config.log10_lr_clip}},
      {"density_floor", CalibrationOptions{}.density_floor},
      {"ds_exclusion", std::string(to_string(config.ds_exclusion))},
      {"n_ss", cal.lrs.n_ss()},
      {"n_ds", cal.lrs.n_ds()},
      {"ss_bandwidth", bandwidth_summary(cal.ss_bandwidth)},
      {"ds_bandwidth", bandwidth_summary(cal.ds_bandwidth)},
  };
  return meta.dump(2) + "\n";
}

MetricsReport run_system(const RunConfig& config, const Dataset& dataset, SystemTag tag,
                         const std::filesystem::path& dir) {
  ScoringOptions sopt;
  sopt.adaptive_cohort_size = config.adaptive_cohort_size;
  sopt.floor_cohort_std = config.floor_cohort_std;
  const auto scores = score_trials(tag, dataset, sopt);

  CalibrationOptions copt;
  copt.log10_lr_clip = config.log10_lr_clip;
  copt.ds_exclusion = config.ds_exclusion;
  const auto cal = loo_calibrate_detailed(scores, copt);

  MetricsOptions mopt;
  mopt.group_mean = config.group_mean;
  mopt.log10_lr_clip = config.log10_lr_clip;
  const auto report = summarize(cal.lrs, dataset.manifest, mopt);
  const auto grid = ece_grid(config);
  const auto curve = ece_curve(cal.lrs, grid, config.log10_lr_clip);

  std::filesystem::create_directories(dir);
  const std::string name(to_string(tag));
  write_scores(scores, dir / "scores.csv");
  write_lrs(cal.lrs, dir / "lrs.csv");
  detail::write_file(dir / "lrs.meta.json", metadata_json(config, tag, cal));
  const std::pair<std::string, std::optional<MetricsReport>> row{name, report};
  detail::write_file(dir / "report.txt", format_report_table({&row, 1}));
  write_report_kv(report, name, dir / "report.kv");

  tippett_render(cal.lrs, report.ci95, dir, name + "_tippett");
  det_render(cal.lrs, dir, name + "_det");
  ece_render(curve, dir, name + "_ece");
  const SystemMetrics sm{name, report};
  accuracy_precision_render({&sm, 1}, dir, name + "_accuracy_precision");
  return report;
}

SystemOutcome run_guarded(const RunConfig& config, const Dataset& dataset, SystemTag tag) {
  const auto dir = config.output_dir / std::string(to_string(tag));
  SystemOutcome out;
  out.system = tag;
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  try {
    out.report = run_system(config, dataset, tag, dir);
    return out;
  } catch (const Error& e) {
    out.error = fmt::format("{}: {}", to_string(tag), e.what());
    out.exit_code = e.exit_code();
  } catch (const std::exception& e) {
    out.error = fmt::format("{}: {}", to_string(tag), e.what());
    out.exit_code = 1;
  }
  std::filesystem::remove_all(dir, ec);
  return out;
}

std::string comparison_csv(const std::vector<SystemOutcome>& rows) {
  std::string out = "system,status,cllr_pooled,cllr_mean,ci95,cllr_min,cllr_cal,eer\n";
  for (const auto& r : rows) {
    if (!r.report) {
      out += fmt::format("{},failed,,,,,,\n", to_string(r.system));
      continue;
    }
    const auto& m = *r.report;
    out += fmt::format("{},ok,{},{},{},{},{},{}\n", to_string(r.system),
                       detail::format_double(m.cllr_pooled),
                       detail::format_double(m.cllr_mean), detail::format_double(m.ci95),
                       detail::format_double(m.cllr_min), detail::format_double(m.cllr_cal),
                       detail::format_double(m.eer));
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(e.what());
  }
  if (!j.is_object()) config_error("top level must be an object");

  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) == std::end(kKnownKeys)) {
      config_error(fmt::format("unknown key '{}'", key));
    }
  }
  if (j.contains("manifest")) c.manifest = resolve_path(j["manifest"], "manifest", base_dir);
  if (j.contains("embeddings")) {
    c.embeddings = resolve_path(j["embeddings"], "embeddings", base_dir);
  }
  if (j.contains("output_dir")) {
    c.output_dir = resolve_path(j["output_dir"], "output_dir", base_dir);
  }
  if (j.contains("systems")) {
    c.systems.clear();
    for (const auto& s : get_as<std::vector<std::string>>(j["systems"], "systems")) {
      const auto tag = parse_system_tag(s);
      if (!tag) config_error(fmt::format("unknown system '{}'", s));
      c.systems.push_back(*tag);
    }
  }
  if (j.contains("K")) {
    const auto k = get_as<long long>(j["K"], "K");
    if (k < 0) config_error("K must be non-negative");
    c.adaptive_cohort_size = static_cast<std::size_t>(k);
  }
  if (j.contains("bandwidth_rule")) {
    c.bandwidth_rule = get_as<std::string>(j["bandwidth_rule"], "bandwidth_rule");
  }
  if (j.contains("clip")) {
    const auto clip = get_as<std::vector<double>>(j["clip"], "clip");
    if (clip.size() != 2) config_error("'clip' must be [low, high]");
    if (clip[0] != -clip[1]) config_error("clip bounds must be symmetric around 0");
    c.log10_lr_clip = clip[1];
  }
  if (j.contains("ds_exclusion")) {
    const auto s = get_as<std::string>(j["ds_exclusion"], "ds_exclusion");
    if (s == to_string(DsExclusion::kExcludeLeftOutSpeakers)) {
      c.ds_exclusion = DsExclusion::kExcludeLeftOutSpeakers;
    } else if (s == to_string(DsExclusion::kUtteranceOnly)) {
      c.ds_exclusion = DsExclusion::kUtteranceOnly;
    } else {
      config_error(fmt::format("unknown ds_exclusion '{}'", s));
    }
  }
  if (j.contains("ece_grid")) {
    const auto& g = j["ece_grid"];
    if (!g.is_object()) config_error("'ece_grid' must be an object");
    for (const auto& [key, value] : g.items()) {
      if (key == "min") c.ece_grid.min = get_as<double>(value, "ece_grid.min");
      else if (key == "max") c.ece_grid.max = get_as<double>(value, "ece_grid.max");
      else if (key == "points") c.ece_grid.points = get_as<std::size_t>(value, "ece_grid.points");
      else config_error(fmt::format("unknown key 'ece_grid.{}'", key));
    }
  }
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("synth")) read_synth(j["synth"], c.synth);
  if (j.contains("group_mean")) {
    const auto s = get_as<std::string>(j["group_mean"], "group_mean");
    if (s == "geometric") c.group_mean = GroupMean::kGeometric;
    else if (s == "arithmetic") c.group_mean = GroupMean::kArithmetic;
    else config_error(fmt::format("unknown group_mean '{}'", s));
  }
  if (j.contains("floor_cohort_std")) {
    c.floor_cohort_std = get_as<bool>(j["floor_cohort_std"], "floor_cohort_std");
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config_text(detail::read_file(path), path.parent_path());
}

void validate_config(const RunConfig& c) {
  if (c.adaptive_cohort_size < 2) config_error("K must be at least 2");
  if (!(c.log10_lr_clip > 0.0) || !std::isfinite(c.log10_lr_clip)) {
    config_error("clip bounds must be finite and non-zero");
  }
  if (c.bandwidth_rule != "silverman") {
    config_error(fmt::format("unknown bandwidth_rule '{}'", c.bandwidth_rule));
  }
  if (c.systems.empty()) config_error("no systems selected");
  std::set<SystemTag> seen;
  for (const auto s : c.systems) {
    if (!seen.insert(s).second) {
      config_error(fmt::format("system {} listed twice", to_string(s)));
    }
  }
  const auto grid = ece_grid(c);
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) {
    config_error("ECE grid must contain the prior log odds 0");
  }
}

void apply_env_overrides(RunConfig& config) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    config.output_dir = dir;
  }
}

SynthOptions synth_options(const RunConfig& config) {
  const auto& s = config.synth;
  SynthOptions o;
  o.n_speakers = s.n_speakers;
  o.n_train_speakers = s.n_train_speakers;
  o.sessions_per_speaker = s.sessions_per_speaker;
  o.dim = s.dim;
  o.noise_scale = s.noise_scale;
  o.seed = config.seed;
  if (s.channel_offset != 0.0) {
    o.channel_offset = random_direction(s.dim, config.seed + 1);
    for (auto& v : o.channel_offset) v *= s.channel_offset;
  }
  return o;
}

std::vector<double> ece_grid(const RunConfig& config) {
  const auto& g = config.ece_grid;
  if (g.points < 2 || !(g.min < g.max)) {
    config_error("ECE grid needs min < max and at least 2 points");
  }
  return linear_grid(g.min, g.max, g.points);
}

ValidationSummary summarize_dataset(const Manifest& manifest) {
  ValidationSummary s;
  s.embedding_dim = manifest.embedding_dim;
  const auto count = [&](Partition p, PartitionCounts& out) {
    std::set<std::string_view> speakers;
    for (const auto* r : manifest.select(p)) {
      ++out.recordings;
      speakers.insert(r->speaker_id);
      ++(r->condition == Condition::kQuestioned ? out.questioned : out.known);
    }
    out.speakers = speakers.size();
  };
  count(Partition::kTrain, s.train);
  count(Partition::kTest, s.test);
  for (const auto& t : enumerate_trials(manifest)) {
    ++s.trials;
    ++(t.same_speaker() ? s.ss_trials : s.ds_trials);
  }
  return s;
}

std::string format_summary(const ValidationSummary& s) {
  return fmt::format(
      "train: {} recordings / {} speakers; test: {} recordings / {} speakers\n"
      "conditions: train {} questioned / {} known; test {} questioned / {} known\n"
      "trials: {} ({} same-speaker, {} different-speakers)\n"
      "embedding dim: {}\n",
      s.train.recordings, s.train.speakers, s.test.recordings, s.test.speakers,
      s.train.questioned, s.train.known, s.test.questioned, s.test.known, s.trials,
      s.ss_trials, s.ds_trials, s.embedding_dim);
}

ValidationSummary cmd_validate(const RunConfig& config) {
  if (config.manifest.empty() || config.embeddings.empty()) {
    config_error("'manifest' and 'embeddings' are required");
  }
  return summarize_dataset(load_dataset(config.manifest, config.embeddings).manifest);
}

ValidationSummary cmd_synth(const RunConfig& config) {
  if (config.manifest.empty() || config.embeddings.empty()) {
    config_error("'manifest' and 'embeddings' are required");
  }
  const auto ds = synthesize_dataset(synth_options(config));
  for (const auto& p : {config.manifest, config.embeddings}) {
    if (p.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p.parent_path(), ec);
      if (ec) {
        throw Error(ErrorKind::kIo, fmt::format("cannot create '{}': {}",
                                                p.parent_path().string(), ec.message()));
      }
    }
  }
  write_manifest(ds.manifest, config.manifest);
  write_embeddings(ds.embeddings, config.embeddings);
  return summarize_dataset(ds.manifest);
}

std::vector<SystemOutcome> comparison_order(std::vector<SystemOutcome> outcomes) {
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const SystemOutcome& a, const SystemOutcome& b) {
                     if (a.report.has_value() != b.report.has_value()) {
                       return a.report.has_value();
                     }
                     return a.report && a.report->cllr_pooled > b.report->cllr_pooled;
                   });
  return outcomes;
}

RunResult cmd_run(const RunConfig& config) {
  validate_config(config);
  if (config.manifest.empty() || config.embeddings.empty()) {
    config_error("'manifest' and 'embeddings' are required");
  }
  const auto dataset = load_dataset(config.manifest, config.embeddings);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIo, fmt::format("cannot create '{}': {}",
                                            config.output_dir.string(), ec.message()));
  }

  std::vector<std::future<SystemOutcome>> jobs;
  for (const auto tag : config.systems) {
    jobs.push_back(std::async(std::launch::async, [&config, &dataset, tag] {
      return run_guarded(config, dataset, tag);
    }));
  }
  RunResult result;
  for (auto& j : jobs) result.outcomes.push_back(j.get());

  const auto ordered = comparison_order(result.outcomes);
  std::vector<std::pair<std::string, std::optional<MetricsReport>>> rows;
  std::vector<SystemMetrics> succeeded;
  for (const auto& o : ordered) {
    rows.emplace_back(std::string(to_string(o.system)), o.report);
    if (o.report) succeeded.push_back({std::string(to_string(o.system)), *o.report});
  }
  result.table = config.output_dir / "comparison.txt";
  result.table_text = format_report_table(rows);
  detail::write_file(result.table, result.table_text);
  detail::write_file(config.output_dir / "comparison.csv", comparison_csv(ordered));
  if (!succeeded.empty()) {
    accuracy_precision_render(succeeded, config.output_dir, "comparison_accuracy_precision");
  }
  return result;
}

}  // namespace fvc
