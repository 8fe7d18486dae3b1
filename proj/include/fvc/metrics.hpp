#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fvc/calibration.hpp"

namespace fvc {

// Log-likelihood-ratio cost:
//   1/2 [ mean_ss log2(1 + 1/LR) + mean_ds log2(1 + LR) ]
double cllr(std::span<const double> lr_ss, std::span<const double> lr_ds);
double cllr(const LRSet& lrs);

// Cllr after PAV recalibration of the given scores.
double cllr_min(const TrialScoreSet& scores, double log10_lr_clip = 10.0);

// The log10 LRs of one questioned recording against all known recordings of
// one known speaker.
struct LrGroup {
  std::string questioned_id;
  std::string known_speaker;
  TrialLabel label = TrialLabel::kDifferentSpeakers;
  std::vector<double> members;
};

// Groups ordered by questioned id, then known speaker.
std::vector<LrGroup> group_lrs(const LRSet& lrs, const Manifest& manifest);

enum class GroupMean { kGeometric, kArithmetic };

// Cllr over one LR per group. kGeometric averages log10 LRs, kArithmetic
// averages the LRs themselves.
double cllr_mean(std::span<const LrGroup> groups,
                 GroupMean mean = GroupMean::kGeometric);

// 1.96 times the pooled within-group standard deviation of log10 LRs
// (denominator N - G over groups with at least two members).
double ci95(std::span<const LrGroup> groups);

// ROC operating point; counts are exact, rates derived.
struct RocPoint {
  std::int64_t fa = 0;    // different-speakers trials accepted
  std::int64_t miss = 0;  // same-speaker trials rejected
  std::int64_t n_ds = 1;
  std::int64_t n_ss = 1;

  double p_fa() const { return static_cast<double>(fa) / static_cast<double>(n_ds); }
  double p_miss() const { return static_cast<double>(miss) / static_cast<double>(n_ss); }
};

// Vertices of the ROC convex hull in increasing P_fa (decreasing P_miss),
// from the threshold sweep "accept when value > threshold".
std::vector<RocPoint> roc_convex_hull(std::span<const double> ss_values,
                                      std::span<const double> ds_values);

double eer_rocch(std::span<const double> ss_values, std::span<const double> ds_values);
double eer_rocch(const LRSet& lrs);

struct EcePoint {
  double prior_log10_odds = 0.0;
  double ece_actual = 0.0;
  double ece_pav = 0.0;
  double ece_neutral = 0.0;
};

// Empirical cross-entropy at prior log10 odds for a given set of LRs.
double ece(std::span<const double> lr_ss, std::span<const double> lr_ds,
           double prior_log10_odds);

// 101 points spanning [-2.5, 2.5]; the middle one is exactly 0.
std::vector<double> default_ece_grid();
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

// Actual, PAV-recalibrated and neutral (LR = 1) cross-entropy per grid point.
std::vector<EcePoint> ece_curve(const LRSet& lrs, std::span<const double> prior_grid,
                                double log10_lr_clip = 10.0);

struct MetricsReport {
  double cllr_pooled = 0.0;
  double cllr_mean = 0.0;
  double ci95 = 0.0;
  double cllr_min = 0.0;
  double cllr_cal = 0.0;
  double eer = 0.0;  // fraction
};

struct MetricsOptions {
  GroupMean group_mean = GroupMean::kGeometric;
  double log10_lr_clip = 10.0;
};

// Cllr_min and EER are taken on the calibrated LRs themselves, so
// cllr_cal = cllr_pooled - cllr_min.
MetricsReport summarize(const LRSet& lrs, const Manifest& manifest,
                        const MetricsOptions& options = {});

// Aligned text table, one row per system, in the given order. Absent
// reports are printed as failed rows.
std::string format_report_table(
    std::span<const std::pair<std::string, std::optional<MetricsReport>>> rows);

void write_report_kv(const MetricsReport& report, std::string_view system,
                     const std::filesystem::path& path);
MetricsReport read_report_kv(const std::filesystem::path& path);

}  // namespace fvc
