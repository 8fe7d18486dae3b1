#include "fvc/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "fvc/error.hpp"
#include "text_io.hpp"

namespace fvc {

namespace {

std::vector<Embedding> train_cohort(const Dataset& ds) {
  std::vector<Embedding> cohort;
  for (const auto* r : ds.manifest.select(Partition::kTrain)) {
    cohort.push_back(ds.embeddings.at(r->recording_id));
  }
  std::sort(cohort.begin(), cohort.end(),
            [](const Embedding& a, const Embedding& b) {
              return a.recording_id < b.recording_id;
            });
  return cohort;
}

std::vector<std::string> test_recording_ids(const std::vector<Trial>& trials) {
  std::vector<std::string> ids;
  for (const auto& t : trials) {
    ids.push_back(t.questioned_id);
    ids.push_back(t.known_id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Error annotate(const Error& e, SystemTag system, std::string_view where) {
  return Error(e.kind(), fmt::format("{} ({}): {}", to_string(system), where, e.what()));
}

}  // namespace

std::string_view to_string(SystemTag tag) noexcept {
  switch (tag) {
    case SystemTag::kSys1: return "SYS1";
    case SystemTag::kSys2: return "SYS2";
    case SystemTag::kSys3: return "SYS3";
    case SystemTag::kSys4: return "SYS4";
  }
  return "SYS?";
}

std::optional<SystemTag> parse_system_tag(std::string_view s) noexcept {
  for (const auto tag : kAllSystems) {
    if (s == to_string(tag)) return tag;
  }
  return std::nullopt;
}

double cosine_score(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kArgument,
                fmt::format("cosine_score: dimension mismatch ({} vs {})",
                            a.size(), b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::kDomain, "cosine_score: zero-norm vector");
  }
  // Clamp rounding excursions so the result stays in [-1, 1].
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double cosine_score(const Embedding& a, const Embedding& b) {
  try {
    return cosine_score(std::span<const double>(a.vector),
                        std::span<const double>(b.vector));
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{} [{} vs {}]", e.what(), a.recording_id,
                                      b.recording_id));
  }
}

ScoreNormStats score_norm_stats(std::span<const double> scores) {
  if (scores.size() < 2) {
    throw Error(ErrorKind::kArgument,
                "score normalization needs at least 2 cohort scores");
  }
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) {
    throw Error(ErrorKind::kDegenerateCohort,
                "cohort scores have zero standard deviation");
  }
  return {mean, sd};
}

double snorm_score(double raw, const ScoreNormStats& q, const ScoreNormStats& k) {
  if (!(q.std > 0.0) || !(k.std > 0.0)) {
    throw Error(ErrorKind::kDegenerateCohort, "S-norm with non-positive std");
  }
  return 0.5 * ((raw - q.mean) / q.std + (raw - k.mean) / k.std);
}

double snorm_score(double raw, std::span<const double> questioned_vs_cohort,
                   std::span<const double> known_vs_cohort) {
  return snorm_score(raw, score_norm_stats(questioned_vs_cohort),
                     score_norm_stats(known_vs_cohort));
}

CohortStats cohort_stats(std::span<const Embedding> cohort, bool floor_std) {
  if (cohort.size() < 2) {
    throw Error(ErrorKind::kArgument, "cohort_stats: cohort needs >= 2 members");
  }
  const std::size_t dim = cohort.front().vector.size();
  CohortStats st;
  st.cohort_size = cohort.size();
  st.mean.assign(dim, 0.0);
  st.std.assign(dim, 0.0);
  for (const auto& e : cohort) {
    if (e.vector.size() != dim) {
      throw Error(ErrorKind::kArgument, "cohort_stats: mixed dimensions");
    }
    for (std::size_t i = 0; i < dim; ++i) st.mean[i] += e.vector[i];
  }
  const double n = static_cast<double>(cohort.size());
  for (auto& m : st.mean) m /= n;
  for (const auto& e : cohort) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = e.vector[i] - st.mean[i];
      st.std[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    st.std[i] = std::sqrt(st.std[i] / n);
    if (!(st.std[i] > 0.0)) {
      if (!floor_std) {
        throw Error(ErrorKind::kDegenerateCohort,
                    fmt::format("cohort dimension {} has zero variance", i));
      }
    }
    if (floor_std) st.std[i] = std::max(st.std[i], kStdFloor);
  }
  return st;
}

Embedding znorm_embedding(const Embedding& w, const CohortStats& stats) {
  if (w.vector.size() != stats.mean.size() || w.vector.size() != stats.std.size()) {
    throw Error(ErrorKind::kArgument,
                fmt::format("znorm_embedding: '{}' has dimension {}, stats {}",
                            w.recording_id, w.vector.size(), stats.mean.size()));
  }
  Embedding out{w.recording_id, std::vector<double>(w.vector.size())};
  for (std::size_t i = 0; i < w.vector.size(); ++i) {
    out.vector[i] = (w.vector[i] - stats.mean[i]) / stats.std[i];
  }
  return out;
}

std::vector<Embedding> adaptive_cohort(const Embedding& w,
                                       std::span<const Embedding> cohort,
                                       std::size_t k) {
  if (k < 1 || cohort.size() < k) {
    throw Error(ErrorKind::kArgument,
                fmt::format("adaptive_cohort: need {} members, cohort has {}", k,
                            cohort.size()));
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    ranked.emplace_back(cosine_score(w, cohort[i]), i);
  }
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k),
                    ranked.end(), [&](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return cohort[a.second].recording_id <
                             cohort[b.second].recording_id;
                    });
  std::vector<Embedding> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(cohort[ranked[i].second]);
  return out;
}

TrialScoreSet score_trials(SystemTag system, const Dataset& ds,
                           const ScoringOptions& options) {
  const auto trials = enumerate_trials(ds.manifest);
  TrialScoreSet out;
  out.system = system;
  out.trials.reserve(trials.size());

  // Per test recording: the embedding actually fed to the cosine (SYS3/SYS4)
  // or its cohort score statistics (SYS2).
  std::unordered_map<std::string, Embedding> prepared;
  std::unordered_map<std::string, ScoreNormStats> norm_stats;

  if (system != SystemTag::kSys1) {
    const auto cohort = train_cohort(ds);
    if (cohort.empty()) {
      throw Error(ErrorKind::kArgument,
                  fmt::format("{} needs a non-empty train partition", to_string(system)));
    }
    std::optional<CohortStats> global;
    if (system == SystemTag::kSys3) {
      try {
        global = cohort_stats(cohort, options.floor_cohort_std);
      } catch (const Error& e) {
        throw annotate(e, system, "train cohort");
      }
    }
    std::vector<double> cohort_scores(cohort.size());
    for (const auto& id : test_recording_ids(trials)) {
      const auto& w = ds.embeddings.at(id);
      try {
        switch (system) {
          case SystemTag::kSys2:
            for (std::size_t i = 0; i < cohort.size(); ++i) {
              cohort_scores[i] = cosine_score(w, cohort[i]);
            }
            norm_stats.emplace(id, score_norm_stats(cohort_scores));
            break;
          case SystemTag::kSys3:
            prepared.emplace(id, znorm_embedding(w, *global));
            break;
          case SystemTag::kSys4: {
            auto selected = adaptive_cohort(w, cohort, options.adaptive_cohort_size);
            // Canonical order keeps the statistics identical to SYS3 when the
            // whole cohort is selected.
            std::sort(selected.begin(), selected.end(),
                      [](const Embedding& a, const Embedding& b) {
                        return a.recording_id < b.recording_id;
                      });
            prepared.emplace(
                id, znorm_embedding(w, cohort_stats(selected, options.floor_cohort_std)));
            break;
          }
          case SystemTag::kSys1:
            break;
        }
      } catch (const Error& e) {
        throw annotate(e, system, fmt::format("recording {}", id));
      }
    }
  }

  for (const auto& t : trials) {
    double score = 0.0;
    try {
      switch (system) {
        case SystemTag::kSys1:
          score = cosine_score(ds.embeddings.at(t.questioned_id),
                               ds.embeddings.at(t.known_id));
          break;
        case SystemTag::kSys2: {
          const double raw = cosine_score(ds.embeddings.at(t.questioned_id),
                                          ds.embeddings.at(t.known_id));
          score = snorm_score(raw, norm_stats.at(t.questioned_id),
                              norm_stats.at(t.known_id));
          break;
        }
        case SystemTag::kSys3:
        case SystemTag::kSys4:
          score = cosine_score(prepared.at(t.questioned_id), prepared.at(t.known_id));
          break;
      }
    } catch (const Error& e) {
      throw annotate(e, system,
                     fmt::format("trial {} vs {}", t.questioned_id, t.known_id));
    }
    out.trials.push_back({t, score});
  }
  return out;
}

void write_scores(const TrialScoreSet& scores, const std::filesystem::path& path) {
  std::string out = fmt::format("# system={}\nquestioned_id,known_id,label,score\n",
                                to_string(scores.system));
  for (const auto& st : scores.trials) {
    out += fmt::format("{},{},{},{}\n", st.trial.questioned_id, st.trial.known_id,
                       to_string(st.trial.label), detail::format_double(st.score));
  }
  detail::write_file(path, out);
}

TrialScoreSet read_scores(const std::filesystem::path& path,
                          const Manifest& manifest) {
  const std::string text = detail::read_file(path);
  std::unordered_map<std::string_view, const RecordingMeta*> by_id;
  for (const auto& r : manifest.records) by_id.emplace(r.recording_id, &r);

  TrialScoreSet out;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto raw_line : detail::split(text, '\n')) {
    ++line_no;
    const auto line = detail::trim(raw_line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("system=");
      if (pos != std::string_view::npos) {
        const auto tag = parse_system_tag(detail::trim(line.substr(pos + 7)));
        if (!tag) {
          throw Error(ErrorKind::kParse,
                      fmt::format("{}:{}: unknown system tag", path.string(), line_no));
        }
        out.system = *tag;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "questioned_id,known_id,label,score") {
        throw Error(ErrorKind::kParse,
                    fmt::format("{}:{}: bad score file header", path.string(), line_no));
      }
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    const auto ctx = fmt::format("{}:{}", path.string(), line_no);
    if (f.size() != 4) throw Error(ErrorKind::kParse, ctx + ": expected 4 fields");
    const auto q = by_id.find(f[0]);
    const auto k = by_id.find(f[1]);
    if (q == by_id.end() || k == by_id.end()) {
      throw Error(ErrorKind::kConsistency, ctx + ": recording not in manifest");
    }
    ScoredTrial st;
    st.trial.questioned_id = std::string(f[0]);
    st.trial.known_id = std::string(f[1]);
    st.trial.questioned_speaker = q->second->speaker_id;
    st.trial.known_speaker = k->second->speaker_id;
    st.trial.label = st.trial.questioned_speaker == st.trial.known_speaker
                         ? TrialLabel::kSameSpeaker
                         : TrialLabel::kDifferentSpeakers;
    if (f[2] != to_string(st.trial.label)) {
      throw Error(ErrorKind::kConsistency, ctx + ": label disagrees with manifest");
    }
    st.score = detail::parse_double(f[3], ctx);
    out.trials.push_back(std::move(st));
  }
  return out;
}

}  // namespace fvc
