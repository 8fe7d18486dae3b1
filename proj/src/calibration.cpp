#include "fvc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "fvc/error.hpp"
#include "text_io.hpp"

namespace fvc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // ln(2 pi)

void require_valid_kde(std::span<const double> support, double h) {
  if (support.size() < 2) {
    throw Error(ErrorKind::kInsufficientSupport,
                fmt::format("KDE needs >= 2 support points, got {}", support.size()));
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorKind::kArgument, "KDE bandwidth must be finite and positive");
  }
}

struct SpeakerScore {
  std::string_view speaker;  // known speaker for DS lists, the speaker for SS
  double score;
};

}  // namespace

KdeModel::KdeModel(std::vector<double> support)
    : support_(std::move(support)) {
  bandwidth_ = select_bandwidth(support_);
  require_valid_kde(support_, bandwidth_);
}

KdeModel::KdeModel(std::vector<double> support, double bandwidth)
    : support_(std::move(support)), bandwidth_(bandwidth) {
  require_valid_kde(support_, bandwidth_);
}

double KdeModel::density(double x) const {
  double sum = 0.0;
  for (double s : support_) {
    const double z = (x - s) / bandwidth_;
    sum += std::exp(-0.5 * z * z);
  }
  return sum / (static_cast<double>(support_.size()) * bandwidth_ *
                std::sqrt(2.0 * std::numbers::pi));
}

double KdeModel::log_density(double x) const {
  double max_term = -std::numeric_limits<double>::infinity();
  for (double s : support_) {
    const double z = (x - s) / bandwidth_;
    max_term = std::max(max_term, -0.5 * z * z);
  }
  double sum = 0.0;
  for (double s : support_) {
    const double z = (x - s) / bandwidth_;
    sum += std::exp(-0.5 * z * z - max_term);
  }
  return max_term + std::log(sum) -
         std::log(static_cast<double>(support_.size()) * bandwidth_) - 0.5 * kLog2Pi;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::kArgument, "quantile of empty data");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double select_bandwidth(std::span<const double> points) {
  if (points.size() < 2) {
    throw Error(ErrorKind::kInsufficientSupport,
                "bandwidth selection needs >= 2 points");
  }
  std::vector<double> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  const double iqr_sd =
      (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.34;
  double spread = std::min(sd, iqr_sd);
  if (!(spread > 0.0)) spread = std::max(sd, iqr_sd);
  if (!(spread > 0.0)) {
    throw Error(ErrorKind::kDegenerateSample,
                "bandwidth selection: all points identical");
  }
  return 0.9 * spread * std::pow(n, -0.2);
}

std::size_t LRSet::n_ss() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      trials.begin(), trials.end(), [](const LrTrial& t) { return t.trial.same_speaker(); }));
}

std::size_t LRSet::n_ds() const noexcept { return trials.size() - n_ss(); }

std::string_view to_string(DsExclusion d) noexcept {
  return d == DsExclusion::kExcludeLeftOutSpeakers ? "exclude_left_out_speakers"
                                                   : "utterance_only";
}

LooCalibration loo_calibrate_detailed(const TrialScoreSet& scores,
                                      const CalibrationOptions& options) {
  if (!(options.log10_lr_clip > 0.0) || !(options.density_floor > 0.0)) {
    throw Error(ErrorKind::kArgument, "calibration clip and floor must be positive");
  }
  std::vector<SpeakerScore> ss_scores;
  std::unordered_map<std::string_view, std::vector<SpeakerScore>> ds_by_utterance;
  for (const auto& st : scores.trials) {
    if (!std::isfinite(st.score)) {
      throw Error(ErrorKind::kArgument,
                  fmt::format("non-finite score for trial {} vs {}",
                              st.trial.questioned_id, st.trial.known_id));
    }
    if (st.trial.same_speaker()) {
      ss_scores.push_back({st.trial.questioned_speaker, st.score});
    } else {
      ds_by_utterance[st.trial.questioned_id].push_back(
          {st.trial.known_speaker, st.score});
    }
  }
  {
    std::vector<std::string_view> speakers;
    for (const auto& s : ss_scores) speakers.push_back(s.speaker);
    std::sort(speakers.begin(), speakers.end());
    if (std::unique(speakers.begin(), speakers.end()) - speakers.begin() < 2) {
      throw Error(ErrorKind::kInsufficientSupport,
                  "calibration needs same-speaker trials from >= 2 speakers");
    }
  }

  // Same-speaker densities depend only on the left-out speaker set.
  std::map<std::pair<std::string_view, std::string_view>, KdeModel> ss_models;
  const auto ss_model = [&](std::string_view a, std::string_view b) -> const KdeModel& {
    if (b < a) std::swap(a, b);
    const auto key = std::make_pair(a, b);
    if (auto it = ss_models.find(key); it != ss_models.end()) return it->second;
    std::vector<double> support;
    for (const auto& s : ss_scores) {
      if (s.speaker != a && s.speaker != b) support.push_back(s.score);
    }
    if (support.size() < 2) {
      throw Error(ErrorKind::kInsufficientSupport,
                  fmt::format("same-speaker density has {} points", support.size()));
    }
    return ss_models.emplace(key, KdeModel(std::move(support))).first->second;
  };

  const double log_floor = std::log(options.density_floor);
  LooCalibration out;
  out.lrs.trials.reserve(scores.trials.size());
  out.ss_bandwidth.reserve(scores.trials.size());
  out.ds_bandwidth.reserve(scores.trials.size());
  std::vector<double> ds_support;
  for (const auto& st : scores.trials) {
    const auto& t = st.trial;
    try {
      const KdeModel& f_ss = t.same_speaker()
                                 ? ss_model(t.questioned_speaker, t.questioned_speaker)
                                 : ss_model(t.questioned_speaker, t.known_speaker);
      ds_support.clear();
      if (const auto it = ds_by_utterance.find(t.questioned_id);
          it != ds_by_utterance.end()) {
        for (const auto& s : it->second) {
          const bool left_out = s.speaker == t.questioned_speaker ||
                                s.speaker == t.known_speaker;
          if (options.ds_exclusion == DsExclusion::kExcludeLeftOutSpeakers && left_out) {
            continue;
          }
          ds_support.push_back(s.score);
        }
      }
      if (ds_support.size() < 2) {
        throw Error(ErrorKind::kInsufficientSupport,
                    fmt::format("different-speakers density has {} points",
                                ds_support.size()));
      }
      const KdeModel f_ds(ds_support);
      const double log_ss = std::max(f_ss.log_density(st.score), log_floor);
      const double log_ds = std::max(f_ds.log_density(st.score), log_floor);
      const double llr = std::clamp((log_ss - log_ds) / std::numbers::ln10,
                                    -options.log10_lr_clip, options.log10_lr_clip);
      out.lrs.trials.push_back({t, llr});
      out.ss_bandwidth.push_back(f_ss.bandwidth());
      out.ds_bandwidth.push_back(f_ds.bandwidth());
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("calibrating trial {} vs {}: {}",
                                        t.questioned_id, t.known_id, e.what()));
    }
  }
  return out;
}

LRSet loo_calibrate(const TrialScoreSet& scores, const CalibrationOptions& options) {
  return loo_calibrate_detailed(scores, options).lrs;
}

std::vector<double> pav_posteriors(std::span<const double> scores,
                                   std::span<const TrialLabel> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kArgument, "pav: scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  struct Block {
    std::int64_t n;
    std::int64_t n_ss;
    std::size_t first;  // index into order
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < order.size();) {
    Block b{0, 0, i};
    const double v = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == v; ++i) {
      ++b.n;
      if (labels[order[i]] == TrialLabel::kSameSpeaker) ++b.n_ss;
    }
    blocks.push_back(b);
    // Merge while the previous block's rate exceeds this one's.
    while (blocks.size() >= 2) {
      auto& prev = blocks[blocks.size() - 2];
      const auto& cur = blocks.back();
      if (prev.n_ss * cur.n <= cur.n_ss * prev.n) break;
      prev.n += cur.n;
      prev.n_ss += cur.n_ss;
      blocks.pop_back();
    }
  }

  std::vector<double> posterior(scores.size());
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    const double p = static_cast<double>(b.n_ss) / static_cast<double>(b.n);
    const std::size_t end = bi + 1 < blocks.size() ? blocks[bi + 1].first : order.size();
    for (std::size_t i = b.first; i < end; ++i) posterior[order[i]] = p;
  }
  return posterior;
}

LRSet pav_llr(const TrialScoreSet& scores, double log10_lr_clip) {
  std::vector<double> values;
  std::vector<TrialLabel> labels;
  values.reserve(scores.trials.size());
  labels.reserve(scores.trials.size());
  for (const auto& st : scores.trials) {
    values.push_back(st.score);
    labels.push_back(st.trial.label);
  }
  const auto n_ss = std::count(labels.begin(), labels.end(), TrialLabel::kSameSpeaker);
  const auto n_ds = static_cast<std::ptrdiff_t>(labels.size()) - n_ss;
  if (n_ss == 0 || n_ds == 0) {
    throw Error(ErrorKind::kArgument, "pav_llr needs both same- and different-speaker trials");
  }
  const auto posterior = pav_posteriors(values, labels);
  const double prior_odds = static_cast<double>(n_ss) / static_cast<double>(n_ds);

  LRSet out;
  out.trials.reserve(scores.trials.size());
  for (std::size_t i = 0; i < scores.trials.size(); ++i) {
    const double p = posterior[i];
    double llr = 0.0;
    if (p <= 0.0) {
      llr = -log10_lr_clip;
    } else if (p >= 1.0) {
      llr = log10_lr_clip;
    } else {
      llr = std::clamp(std::log10(p / (1.0 - p) / prior_odds), -log10_lr_clip,
                       log10_lr_clip);
    }
    out.trials.push_back({scores.trials[i].trial, llr});
  }
  return out;
}

TrialScoreSet as_scores(const LRSet& lrs) {
  TrialScoreSet out;
  out.trials.reserve(lrs.trials.size());
  for (const auto& t : lrs.trials) out.trials.push_back({t.trial, t.log10_lr});
  return out;
}

void write_lrs(const LRSet& lrs, const std::filesystem::path& path) {
  std::string out = "questioned_id,known_id,label,log10_lr\n";
  for (const auto& t : lrs.trials) {
    out += fmt::format("{},{},{},{}\n", t.trial.questioned_id, t.trial.known_id,
                       to_string(t.trial.label), detail::format_double(t.log10_lr));
  }
  detail::write_file(path, out);
}

LRSet read_lrs(const std::filesystem::path& path, const Manifest& manifest) {
  const std::string text = detail::read_file(path);
  std::unordered_map<std::string_view, const RecordingMeta*> by_id;
  for (const auto& r : manifest.records) by_id.emplace(r.recording_id, &r);
  LRSet out;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (const auto raw_line : detail::split(text, '\n')) {
    ++line_no;
    const auto line = detail::trim(raw_line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "questioned_id,known_id,label,log10_lr") {
        throw Error(ErrorKind::kParse,
                    fmt::format("{}:{}: bad LR file header", path.string(), line_no));
      }
      header_seen = true;
      continue;
    }
    const auto ctx = fmt::format("{}:{}", path.string(), line_no);
    const auto f = detail::split(line, ',');
    if (f.size() != 4) throw Error(ErrorKind::kParse, ctx + ": expected 4 fields");
    const auto q = by_id.find(f[0]);
    const auto k = by_id.find(f[1]);
    if (q == by_id.end() || k == by_id.end()) {
      throw Error(ErrorKind::kConsistency, ctx + ": recording not in manifest");
    }
    LrTrial t;
    t.trial.questioned_id = std::string(f[0]);
    t.trial.known_id = std::string(f[1]);
    t.trial.questioned_speaker = q->second->speaker_id;
    t.trial.known_speaker = k->second->speaker_id;
    t.trial.label = t.trial.questioned_speaker == t.trial.known_speaker
                        ? TrialLabel::kSameSpeaker
                        : TrialLabel::kDifferentSpeakers;
    if (f[2] != to_string(t.trial.label)) {
      throw Error(ErrorKind::kConsistency, ctx + ": label disagrees with manifest");
    }
    t.log10_lr = detail::parse_double(f[3], ctx);
    out.trials.push_back(std::move(t));
  }
  return out;
}

}  // namespace fvc
