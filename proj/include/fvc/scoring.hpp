#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fvc/dataset.hpp"

namespace fvc {

// The four score computation schemes:
//   SYS1  plain cosine, training data unused
//   SYS2  cosine followed by symmetric score normalization (S-norm) against
//         the whole training partition
//   SYS3  per-dimension z-normalization of both embeddings with statistics of
//         the whole training partition, then cosine
//   SYS4  as SYS3 but each embedding uses its own top-K most similar cohort
enum class SystemTag { kSys1, kSys2, kSys3, kSys4 };

std::string_view to_string(SystemTag tag) noexcept;
std::optional<SystemTag> parse_system_tag(std::string_view s) noexcept;
inline constexpr SystemTag kAllSystems[] = {SystemTag::kSys1, SystemTag::kSys2,
                                            SystemTag::kSys3, SystemTag::kSys4};

struct CohortStats {
  std::vector<double> mean;
  std::vector<double> std;  // population convention, all > 0
  std::size_t cohort_size = 0;
};

struct ScoreNormStats {
  double mean = 0.0;
  double std = 1.0;
};

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

struct TrialScoreSet {
  SystemTag system = SystemTag::kSys1;
  std::vector<ScoredTrial> trials;
};

struct ScoringOptions {
  std::size_t adaptive_cohort_size = 100;
  // When set, zero-variance cohort dimensions get std = kStdFloor instead of
  // failing with a degenerate-cohort error.
  bool floor_cohort_std = false;
};

inline constexpr double kStdFloor = 1e-8;

double cosine_score(std::span<const double> a, std::span<const double> b);
double cosine_score(const Embedding& a, const Embedding& b);

// Mean and population standard deviation of a score list (>= 2 entries).
ScoreNormStats score_norm_stats(std::span<const double> scores);

double snorm_score(double raw, const ScoreNormStats& questioned,
                   const ScoreNormStats& known);
double snorm_score(double raw, std::span<const double> questioned_vs_cohort,
                   std::span<const double> known_vs_cohort);

CohortStats cohort_stats(std::span<const Embedding> cohort,
                         bool floor_std = false);

Embedding znorm_embedding(const Embedding& w, const CohortStats& stats);

// The k cohort members most cosine-similar to w, best first. Equal scores are
// ordered by recording_id.
std::vector<Embedding> adaptive_cohort(const Embedding& w,
                                       std::span<const Embedding> cohort,
                                       std::size_t k = 100);

TrialScoreSet score_trials(SystemTag system, const Dataset& dataset,
                           const ScoringOptions& options = {});

void write_scores(const TrialScoreSet& scores, const std::filesystem::path& path);
// Speaker identities are recovered from the manifest.
TrialScoreSet read_scores(const std::filesystem::path& path,
                          const Manifest& manifest);

}  // namespace fvc
