#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fvc/scoring.hpp"

namespace fvc {

// Gaussian-kernel density estimate over a fixed support.
class KdeModel {
 public:
  // Bandwidth from select_bandwidth().
  explicit KdeModel(std::vector<double> support);
  KdeModel(std::vector<double> support, double bandwidth);

  std::span<const double> support() const noexcept { return support_; }
  double bandwidth() const noexcept { return bandwidth_; }

  double density(double x) const;
  // Computed with log-sum-exp, finite wherever the density is representable
  // in log form.
  double log_density(double x) const;

 private:
  std::vector<double> support_;
  double bandwidth_ = 1.0;
};

inline double kde_density(const KdeModel& model, double x) {
  return model.density(x);
}

// Linear-interpolation quantile (the "type 7" definition) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

// Silverman's rule of thumb: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), with the
// population sd. Falls back to the non-zero spread measure when the other
// one vanishes.
double select_bandwidth(std::span<const double> points);

struct LrTrial {
  Trial trial;
  double log10_lr = 0.0;

  double lr() const { return std::pow(10.0, log10_lr); }
};

struct LRSet {
  std::vector<LrTrial> trials;

  std::size_t n_ss() const noexcept;
  std::size_t n_ds() const noexcept;
};

// How the different-speakers density of a trial is restricted. Both variants
// keep only the different-speakers scores of the trial's questioned
// recording; kExcludeLeftOutSpeakers also drops those whose known speaker is
// one of the left-out speakers.
enum class DsExclusion { kExcludeLeftOutSpeakers, kUtteranceOnly };

std::string_view to_string(DsExclusion d) noexcept;

struct CalibrationOptions {
  double log10_lr_clip = 10.0;
  double density_floor = 1e-300;
  DsExclusion ds_exclusion = DsExclusion::kExcludeLeftOutSpeakers;
};

struct LooCalibration {
  LRSet lrs;
  // Per trial, in trial order.
  std::vector<double> ss_bandwidth;
  std::vector<double> ds_bandwidth;
};

// Leave-one-or-two-speakers-out calibration of test scores into likelihood
// ratios. For each trial the same-speaker density uses every same-speaker
// score except those of the trial's speaker(s); the different-speakers
// density uses the different-speakers scores of the trial's questioned
// recording (see DsExclusion).
LooCalibration loo_calibrate_detailed(const TrialScoreSet& scores,
                                      const CalibrationOptions& options = {});
LRSet loo_calibrate(const TrialScoreSet& scores,
                    const CalibrationOptions& options = {});

// Isotonic (non-decreasing in score) fit of P(same speaker | score) by pool
// adjacent violators, returned in input order. Tied scores share one block.
std::vector<double> pav_posteriors(std::span<const double> scores,
                                   std::span<const TrialLabel> labels);

// PAV posterior odds divided by the empirical prior odds N_ss / N_ds, in
// log10 and clipped to +/- clip. Posteriors of exactly 0 or 1 map to the
// clip bounds.
LRSet pav_llr(const TrialScoreSet& scores, double log10_lr_clip = 10.0);

// Views an LR set as a score set (score = log10 LR) so that score-based
// procedures can be applied to calibrated output.
TrialScoreSet as_scores(const LRSet& lrs);

void write_lrs(const LRSet& lrs, const std::filesystem::path& path);
LRSet read_lrs(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace fvc
