#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fvc/calibration.hpp"
#include "fvc/dataset.hpp"
#include "fvc/metrics.hpp"
#include "fvc/scoring.hpp"

namespace fvc {

struct EceGridSpec {
  double min = -2.5;
  double max = 2.5;
  std::size_t points = 101;
};

// Parameters of `synth`. The channel offset is a magnitude applied along a
// seed-derived unit direction.
struct SynthConfig {
  int n_speakers = 60;
  int n_train_speakers = 60;
  int sessions_per_speaker = 3;
  int dim = 192;
  double noise_scale = 0.05;
  double channel_offset = 0.0;
};

struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path embeddings;
  std::vector<SystemTag> systems{std::begin(kAllSystems), std::end(kAllSystems)};
  std::size_t adaptive_cohort_size = 100;  // K
  std::string bandwidth_rule = "silverman";
  double log10_lr_clip = 10.0;
  DsExclusion ds_exclusion = DsExclusion::kExcludeLeftOutSpeakers;
  EceGridSpec ece_grid;
  std::filesystem::path output_dir = "fvc_out";
  std::uint64_t seed = 1;
  SynthConfig synth;
  GroupMean group_mean = GroupMean::kGeometric;
  bool floor_cohort_std = false;
};

inline constexpr const char* kOutputDirEnv = "FVC_OUTPUT_DIR";

// JSON object whose keys mirror RunConfig. Relative paths are taken relative
// to base_dir. Unknown keys are rejected.
RunConfig parse_config_text(std::string_view json, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// Throws an argument error unless K >= 2, the clip is positive and finite,
// the bandwidth rule is known and the ECE grid contains 0.
void validate_config(const RunConfig& config);

// Replaces output_dir with $FVC_OUTPUT_DIR when that is set and non-empty.
void apply_env_overrides(RunConfig& config);

SynthOptions synth_options(const RunConfig& config);
std::vector<double> ece_grid(const RunConfig& config);

struct PartitionCounts {
  std::size_t recordings = 0;
  std::size_t speakers = 0;
  std::size_t questioned = 0;
  std::size_t known = 0;
};

struct ValidationSummary {
  PartitionCounts train;
  PartitionCounts test;
  std::size_t embedding_dim = 0;
  std::size_t trials = 0;
  std::size_t ss_trials = 0;
  std::size_t ds_trials = 0;
};

ValidationSummary summarize_dataset(const Manifest& manifest);
std::string format_summary(const ValidationSummary& summary);

ValidationSummary cmd_validate(const RunConfig& config);

// Writes the synthetic manifest and embeddings to the configured paths.
ValidationSummary cmd_synth(const RunConfig& config);

struct SystemOutcome {
  SystemTag system = SystemTag::kSys1;
  std::optional<MetricsReport> report;  // absent when the system failed
  std::string error;
  int exit_code = 0;
};

struct RunResult {
  std::vector<SystemOutcome> outcomes;  // in configured order
  std::filesystem::path table;          // comparison table (text)
  std::string table_text;
};

// Per system, writes into output_dir/<SYS>/: scores.csv, lrs.csv,
// lrs.meta.json, report.txt, report.kv and the plots <SYS>_tippett,
// <SYS>_det, <SYS>_ece and <SYS>_accuracy_precision (.svg + .csv). A failing system leaves no
// directory behind. The comparison table, its CSV and a combined
// accuracy-precision plot go to output_dir itself.
RunResult cmd_run(const RunConfig& config);

// Rows sorted by decreasing Cllr_pooled; failed systems last, in configured
// order.
std::vector<SystemOutcome> comparison_order(std::vector<SystemOutcome> outcomes);

}  // namespace fvc
