#include "fvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "fvc/error.hpp"
#include "text_io.hpp"

namespace fvc {

namespace {

void split_lrs(const LRSet& lrs, std::vector<double>& ss, std::vector<double>& ds) {
  for (const auto& t : lrs.trials) {
    (t.trial.same_speaker() ? ss : ds).push_back(t.lr());
  }
}

void split_llrs(const LRSet& lrs, std::vector<double>& ss, std::vector<double>& ds) {
  for (const auto& t : lrs.trials) {
    (t.trial.same_speaker() ? ss : ds).push_back(t.log10_lr);
  }
}

void require_both(std::size_t n_ss, std::size_t n_ds, std::string_view what) {
  if (n_ss == 0 || n_ds == 0) {
    throw Error(ErrorKind::kArgument,
                fmt::format("{} needs both same- and different-speaker values", what));
  }
}

__int128 cross(const RocPoint& o, const RocPoint& a, const RocPoint& b) {
  // Points share n_ss/n_ds, so the comparison is done on counts scaled to a
  // common denominator: x = fa * n_ss, y = miss * n_ds.
  const __int128 ox = o.fa * o.n_ss, oy = o.miss * o.n_ds;
  const __int128 ax = a.fa * a.n_ss, ay = a.miss * a.n_ds;
  const __int128 bx = b.fa * b.n_ss, by = b.miss * b.n_ds;
  return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

}  // namespace

double cllr(std::span<const double> lr_ss, std::span<const double> lr_ds) {
  require_both(lr_ss.size(), lr_ds.size(), "cllr");
  double sum_ss = 0.0;
  for (double lr : lr_ss) sum_ss += std::log2(1.0 + 1.0 / lr);
  double sum_ds = 0.0;
  for (double lr : lr_ds) sum_ds += std::log2(1.0 + lr);
  return 0.5 * (sum_ss / static_cast<double>(lr_ss.size()) +
                sum_ds / static_cast<double>(lr_ds.size()));
}

double cllr(const LRSet& lrs) {
  std::vector<double> ss, ds;
  split_lrs(lrs, ss, ds);
  return cllr(ss, ds);
}

double cllr_min(const TrialScoreSet& scores, double log10_lr_clip) {
  return cllr(pav_llr(scores, log10_lr_clip));
}

std::vector<LrGroup> group_lrs(const LRSet& lrs, const Manifest& manifest) {
  std::unordered_map<std::string_view, const RecordingMeta*> by_id;
  for (const auto& r : manifest.records) by_id.emplace(r.recording_id, &r);

  std::map<std::pair<std::string, std::string>, LrGroup> groups;
  for (const auto& t : lrs.trials) {
    const auto q = by_id.find(t.trial.questioned_id);
    const auto k = by_id.find(t.trial.known_id);
    if (q == by_id.end() || k == by_id.end() ||
        q->second->speaker_id != t.trial.questioned_speaker ||
        k->second->speaker_id != t.trial.known_speaker) {
      throw Error(ErrorKind::kConsistency,
                  fmt::format("trial {} vs {} does not resolve in the manifest",
                              t.trial.questioned_id, t.trial.known_id));
    }
    auto& g = groups[{t.trial.questioned_id, t.trial.known_speaker}];
    if (g.members.empty()) {
      g.questioned_id = t.trial.questioned_id;
      g.known_speaker = t.trial.known_speaker;
      g.label = t.trial.label;
    }
    g.members.push_back(t.log10_lr);
  }
  std::vector<LrGroup> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

double cllr_mean(std::span<const LrGroup> groups, GroupMean mean) {
  std::vector<double> ss, ds;
  for (const auto& g : groups) {
    if (g.members.empty()) {
      throw Error(ErrorKind::kArgument, "cllr_mean: empty group");
    }
    double acc = 0.0;
    for (double llr : g.members) {
      acc += mean == GroupMean::kGeometric ? llr : std::pow(10.0, llr);
    }
    acc /= static_cast<double>(g.members.size());
    const double lr = mean == GroupMean::kGeometric ? std::pow(10.0, acc) : acc;
    (g.label == TrialLabel::kSameSpeaker ? ss : ds).push_back(lr);
  }
  return cllr(ss, ds);
}

double ci95(std::span<const LrGroup> groups) {
  double ss = 0.0;
  std::size_t n = 0;
  std::size_t g_count = 0;
  for (const auto& g : groups) {
    if (g.members.size() < 2) continue;
    double mean = 0.0;
    for (double v : g.members) mean += v;
    mean /= static_cast<double>(g.members.size());
    for (double v : g.members) ss += (v - mean) * (v - mean);
    n += g.members.size();
    ++g_count;
  }
  if (g_count == 0) {
    throw Error(ErrorKind::kUndefinedPrecision,
                "95% CI undefined: no group has two or more members");
  }
  return 1.96 * std::sqrt(ss / static_cast<double>(n - g_count));
}

std::vector<RocPoint> roc_convex_hull(std::span<const double> ss_values,
                                      std::span<const double> ds_values) {
  require_both(ss_values.size(), ds_values.size(), "ROC convex hull");
  std::vector<double> ss(ss_values.begin(), ss_values.end());
  std::vector<double> ds(ds_values.begin(), ds_values.end());
  std::sort(ss.begin(), ss.end());
  std::sort(ds.begin(), ds.end());
  const auto n_ss = static_cast<std::int64_t>(ss.size());
  const auto n_ds = static_cast<std::int64_t>(ds.size());

  // Sweep thresholds from -inf up through every distinct value.
  std::vector<double> thresholds;
  std::merge(ss.begin(), ss.end(), ds.begin(), ds.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<RocPoint> points;
  points.push_back({n_ds, 0, n_ds, n_ss});
  for (double t : thresholds) {
    const auto miss = std::upper_bound(ss.begin(), ss.end(), t) - ss.begin();
    const auto rejected_ds = std::upper_bound(ds.begin(), ds.end(), t) - ds.begin();
    points.push_back({n_ds - rejected_ds, miss, n_ds, n_ss});
  }
  // Increasing P_fa; for equal P_fa only the lowest P_miss can be on the
  // lower hull.
  std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fa != b.fa ? a.fa < b.fa : a.miss < b.miss;
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const RocPoint& a, const RocPoint& b) { return a.fa == b.fa; }),
               points.end());

  std::vector<RocPoint> hull;
  for (const auto& p : points) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return hull;
}

double eer_rocch(std::span<const double> ss_values, std::span<const double> ds_values) {
  const auto hull = roc_convex_hull(ss_values, ds_values);
  const auto n_ss = hull.front().n_ss;
  const auto n_ds = hull.front().n_ds;
  // Sign of P_fa - P_miss, exactly: fa * n_ss - miss * n_ds.
  const auto diff = [&](const RocPoint& p) { return p.fa * n_ss - p.miss * n_ds; };
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    if (diff(a) == 0) return a.p_fa();
    if (i + 1 < hull.size()) {
      const auto& b = hull[i + 1];
      if (diff(a) < 0 && diff(b) > 0) {
        // Intersection of the segment with P_fa = P_miss as one exact ratio:
        // (miss_a * dfa - fa_a * dmiss) / (dfa * n_ss - dmiss * n_ds).
        const auto dfa = b.fa - a.fa;
        const auto dmiss = b.miss - a.miss;
        const auto num = a.miss * dfa - a.fa * dmiss;
        const auto den = dfa * n_ss - dmiss * n_ds;
        return static_cast<double>(num) / static_cast<double>(den);
      }
    }
  }
  // Unreachable: the hull runs from P_fa - P_miss < 0 to (1, 0).
  throw Error(ErrorKind::kConsistency, "ROC hull does not cross the EER line");
}

double eer_rocch(const LRSet& lrs) {
  std::vector<double> ss, ds;
  split_llrs(lrs, ss, ds);
  return eer_rocch(ss, ds);
}

double ece(std::span<const double> lr_ss, std::span<const double> lr_ds,
           double prior_log10_odds) {
  require_both(lr_ss.size(), lr_ds.size(), "ece");
  const double odds = std::pow(10.0, prior_log10_odds);
  const double p_ss = odds / (1.0 + odds);
  const double p_ds = 1.0 / (1.0 + odds);
  double sum_ss = 0.0;
  for (double lr : lr_ss) sum_ss += std::log2(1.0 + 1.0 / (lr * odds));
  double sum_ds = 0.0;
  for (double lr : lr_ds) sum_ds += std::log2(1.0 + lr * odds);
  return p_ss * (sum_ss / static_cast<double>(lr_ss.size())) +
         p_ds * (sum_ds / static_cast<double>(lr_ds.size()));
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw Error(ErrorKind::kArgument, "grid needs >= 1 point");
  if (points == 1) return {lo};
  std::vector<double> grid(points);
  const double span = hi - lo;
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = lo + span * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

std::vector<double> default_ece_grid() { return linear_grid(-2.5, 2.5, 101); }

std::vector<EcePoint> ece_curve(const LRSet& lrs, std::span<const double> prior_grid,
                                double log10_lr_clip) {
  if (prior_grid.empty()) throw Error(ErrorKind::kArgument, "ece_curve: empty grid");
  std::vector<double> ss, ds;
  split_lrs(lrs, ss, ds);
  require_both(ss.size(), ds.size(), "ece_curve");
  std::vector<double> pav_ss, pav_ds;
  split_lrs(pav_llr(as_scores(lrs), log10_lr_clip), pav_ss, pav_ds);
  const std::vector<double> neutral_ss(ss.size(), 1.0);
  const std::vector<double> neutral_ds(ds.size(), 1.0);

  std::vector<EcePoint> out;
  out.reserve(prior_grid.size());
  for (double prior : prior_grid) {
    out.push_back({prior, ece(ss, ds, prior), ece(pav_ss, pav_ds, prior),
                   ece(neutral_ss, neutral_ds, prior)});
  }
  return out;
}

MetricsReport summarize(const LRSet& lrs, const Manifest& manifest,
                        const MetricsOptions& options) {
  MetricsReport r;
  r.cllr_pooled = cllr(lrs);
  r.cllr_min = cllr_min(as_scores(lrs), options.log10_lr_clip);
  r.cllr_cal = r.cllr_pooled - r.cllr_min;
  const auto groups = group_lrs(lrs, manifest);
  r.cllr_mean = cllr_mean(groups, options.group_mean);
  r.ci95 = ci95(groups);
  r.eer = eer_rocch(lrs);
  return r;
}

std::string format_report_table(
    std::span<const std::pair<std::string, std::optional<MetricsReport>>> rows) {
  std::size_t name_width = 6;
  for (const auto& [name, report] : rows) name_width = std::max(name_width, name.size());
  std::string out = fmt::format("{:<{}}  {:>11}  {:>10}  {:>8}  {:>9}  {:>9}  {:>7}\n",
                                "System", name_width, "Cllr_pooled", "Cllr_mean",
                                "95% CI", "Cllr_min", "Cllr_cal", "EER%");
  for (const auto& [name, report] : rows) {
    if (!report) {
      out += fmt::format("{:<{}}  {:>11}\n", name, name_width, "(failed)");
      continue;
    }
    out += fmt::format("{:<{}}  {:>11.3f}  {:>10.3f}  {:>8.3f}  {:>9.3f}  {:>9.3f}  {:>6.1f}%\n",
                       name, name_width, report->cllr_pooled, report->cllr_mean,
                       report->ci95, report->cllr_min, report->cllr_cal,
                       100.0 * report->eer);
  }
  return out;
}

void write_report_kv(const MetricsReport& r, std::string_view system,
                     const std::filesystem::path& path) {
  std::string out = fmt::format("system={}\n", system);
  out += "cllr_pooled=" + detail::format_double(r.cllr_pooled) + "\n";
  out += "cllr_mean=" + detail::format_double(r.cllr_mean) + "\n";
  out += "ci95=" + detail::format_double(r.ci95) + "\n";
  out += "cllr_min=" + detail::format_double(r.cllr_min) + "\n";
  out += "cllr_cal=" + detail::format_double(r.cllr_cal) + "\n";
  out += "eer=" + detail::format_double(r.eer) + "\n";
  detail::write_file(path, out);
}

MetricsReport read_report_kv(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::map<std::string, double, std::less<>> values;
  for (const auto raw : detail::split(text, '\n')) {
    const auto line = detail::trim(raw);
    const auto eq = line.find('=');
    if (line.empty() || eq == std::string_view::npos) continue;
    const auto key = line.substr(0, eq);
    if (key == "system") continue;
    values[std::string(key)] = detail::parse_double(line.substr(eq + 1), path.string());
  }
  const auto get = [&](std::string_view key) {
    const auto it = values.find(key);
    if (it == values.end()) {
      throw Error(ErrorKind::kParse,
                  fmt::format("{}: missing key '{}'", path.string(), key));
    }
    return it->second;
  };
  MetricsReport r;
  r.cllr_pooled = get("cllr_pooled");
  r.cllr_mean = get("cllr_mean");
  r.ci95 = get("ci95");
  r.cllr_min = get("cllr_min");
  r.cllr_cal = get("cllr_cal");
  r.eer = get("eer");
  return r;
}

}  // namespace fvc
