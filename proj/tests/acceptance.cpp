// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "fvc/calibration.hpp"
#include "fvc/error.hpp"
#include "fvc/metrics.hpp"
#include "fvc/pipeline.hpp"
#include "fvc/scoring.hpp"
#include "oracles.hpp"

using namespace fvc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first violation of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failure_.empty()) failure_ = what;
  }
  bool ok() const { return failure_.empty(); }
  const std::string& failure() const { return failure_; }

 private:
  std::string failure_;
};

int g_failed = 0;

void criterion(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, fmt::format("exception: {}", e.what()));
  }
  if (c.ok()) {
    std::cout << "PASS " << name << "\n";
  } else {
    ++g_failed;
    std::cout << "FAIL " << name << ": " << c.failure() << "\n";
  }
  std::cout.flush();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset affine(const Dataset& ds, const std::vector<double>& alpha,
               const std::vector<double>& beta) {
  std::vector<Embedding> out;
  for (const auto& e : ds.embeddings.items()) {
    Embedding t = e;
    for (std::size_t i = 0; i < t.vector.size(); ++i) t.vector[i] = alpha[i] * t.vector[i] + beta[i];
    out.push_back(std::move(t));
  }
  return Dataset{ds.manifest, EmbeddingSet(std::move(out))};
}

TrialScoreSet six_speaker_scores(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> ss(0.6, 0.15), ds(0.1, 0.15);
  TrialScoreSet out;
  for (int a = 0; a < 6; ++a) {
    for (int qi = 0; qi < 2; ++qi) {
      for (int b = 0; b < 6; ++b) {
        for (int ki = 0; ki < 2; ++ki) {
          const auto sa = fmt::format("S{}", a), sb = fmt::format("S{}", b);
          auto t = fixture::trial(sa, sb, fmt::format("{}_q{}", sa, qi),
                                  fmt::format("{}_k{}", sb, ki));
          out.trials.push_back({t, a == b ? ss(rng) : ds(rng)});
        }
      }
    }
  }
  return out;
}

RunConfig synthetic_run(const fs::path& dir, double channel_offset) {
  RunConfig c;
  c.manifest = dir / "manifest.csv";
  c.embeddings = dir / "embeddings.bin";
  c.output_dir = dir / "out";
  c.seed = 1;
  c.synth.n_speakers = 60;
  c.synth.n_train_speakers = 60;
  c.synth.sessions_per_speaker = 3;
  c.synth.dim = 192;
  // 0.05 of the expected inter-speaker distance per dimension (sqrt 2).
  c.synth.noise_scale = 0.05 * std::sqrt(2.0);
  c.synth.channel_offset = channel_offset;
  return c;
}

const MetricsReport& report_of(const RunResult& r, SystemTag tag) {
  for (const auto& o : r.outcomes) {
    if (o.system == tag) {
      if (!o.report) throw std::runtime_error(o.error);
      return *o.report;
    }
  }
  throw std::runtime_error("system missing from run");
}

// Rows of comparison.csv in file order: (system, cllr_pooled).
std::vector<std::pair<std::string, double>> comparison_rows(const fs::path& csv) {
  std::vector<std::pair<std::string, double>> rows;
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    rows.emplace_back(f.at(0), f.at(1) == "ok" ? std::stod(f.at(2)) : NAN);
  }
  return rows;
}

void check_reports(Check& c, const RunConfig& cfg, const RunResult& r) {
  for (const auto& o : r.outcomes) {
    if (!o.report) continue;
    const auto kv = read_report_kv(cfg.output_dir / std::string(to_string(o.system)) / "report.kv");
    c.expect(kv.cllr_cal == kv.cllr_pooled - kv.cllr_min,
             fmt::format("{}: report.kv cal != pooled - min", to_string(o.system)));
    c.expect(kv.cllr_pooled == o.report->cllr_pooled && kv.cllr_min == o.report->cllr_min &&
                 kv.cllr_cal == o.report->cllr_cal,
             fmt::format("{}: report.kv differs from the in-memory report", to_string(o.system)));
  }
  const auto rows = comparison_rows(cfg.output_dir / "comparison.csv");
  c.expect(rows.size() == r.outcomes.size(), "comparison.csv row count");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool failed_before_ok = std::isnan(rows[i - 1].second) && !std::isnan(rows[i].second);
    c.expect(!failed_before_ok && !(rows[i - 1].second < rows[i].second),
             fmt::format("comparison not sorted at row {}", i));
  }
  const auto table = slurp(r.table);
  std::size_t last = 0;
  for (const auto& [name, pooled] : rows) {
    const auto pos = table.find(name);
    c.expect(pos != std::string::npos && pos >= last, "comparison.txt order differs from csv");
    last = pos;
  }
}

}  // namespace

int main() {
  criterion("Cllr of LR = 1 is exactly 1", [](Check& c) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> size(1, 1000);
    for (int rep = 0; rep < 100; ++rep) {
      const std::vector<double> ss(size(rng), 1.0), ds(size(rng), 1.0);
      c.expect(std::abs(cllr(ss, ds) - 1.0) < 1e-12, "random-size set");
    }
    const std::vector<double> big_ss(500000, 1.0), big_ds(500000, 1.0);
    c.expect(std::abs(cllr(big_ss, big_ds) - 1.0) < 1e-12, "10^6-trial set");
    const auto lrs = fixture::lrs(std::vector<double>(300, 0.0), std::vector<double>(700, 0.0));
    c.expect(std::abs(cllr(lrs) - 1.0) < 1e-12, "LRSet overload");
    const double t = seconds_since(t0);
    c.expect(t < 1.0, fmt::format("took {:.3f} s", t));
  });

  criterion("Cllr matches the direct-summation oracle", [](Check& c) {
    std::mt19937_64 rng(102);
    std::uniform_int_distribution<int> size(1, 1000);
    std::uniform_real_distribution<double> llr(-8.0, 8.0);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> ss(size(rng)), ds(size(rng));
      for (auto& v : ss) v = std::pow(10.0, llr(rng));
      for (auto& v : ds) v = std::pow(10.0, llr(rng));
      const double got = cllr(ss, ds), want = oracle::cllr(ss, ds);
      c.expect(std::abs(got - want) < 1e-12, fmt::format("set {}: {} vs {}", rep, got, want));
    }
  });

  // Randomized synthetic runs shared by the ECE and PAV criteria.
  std::vector<LRSet> runs;
  for (int seed = 1; seed <= 50; ++seed) {
    const auto tag = kAllSystems[static_cast<std::size_t>(seed) % 4];
    const auto ds = fixture::small_synthetic(static_cast<std::uint64_t>(seed), 0.3 + 0.02 * seed);
    ScoringOptions so;
    so.adaptive_cohort_size = 10;
    runs.push_back(loo_calibrate(score_trials(tag, ds, so)));
  }
  const auto grid = default_ece_grid();

  criterion("ECE at prior log odds 0 equals Cllr pooled and Cllr min", [&](Check& c) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto curve = ece_curve(runs[i], grid);
      const auto& mid = curve[grid.size() / 2];
      c.expect(mid.prior_log10_odds == 0.0, "grid midpoint is not 0");
      c.expect(std::abs(mid.ece_actual - cllr(runs[i])) < 1e-12,
               fmt::format("run {}: ece_actual(0) != Cllr_pooled", i));
      c.expect(std::abs(mid.ece_pav - cllr_min(as_scores(runs[i]))) < 1e-12,
               fmt::format("run {}: ece_pav(0) != Cllr_min", i));
      c.expect(mid.ece_neutral == 1.0, fmt::format("run {}: neutral(0) != 1", i));
    }
  });

  criterion("PAV optimality over 50 synthetic runs", [&](Check& c) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const double pooled = cllr(runs[i]);
      const double min = cllr_min(as_scores(runs[i]));
      c.expect(min <= pooled + 1e-9, fmt::format("run {}: Cllr_min {} > pooled {}", i, min, pooled));
      for (const auto& p : ece_curve(runs[i], grid)) {
        c.expect(p.ece_pav <= p.ece_actual + 1e-9,
                 fmt::format("run {}: ece_pav > ece_actual at {}", i, p.prior_log10_odds));
      }
    }
  });

  criterion("ROCCH EER equals the brute-force hull", [](Check& c) {
    c.expect(eer_rocch(std::vector<double>{3, 5}, std::vector<double>{2, 4}) == 0.25,
             "SS {3,5} DS {2,4}");
    c.expect(eer_rocch(std::vector<double>{1}, std::vector<double>{1}) == 0.5,
             "identical singletons");
    std::mt19937_64 rng(103);
    std::uniform_int_distribution<int> n_ss(1, 11), value(0, 8);
    for (int rep = 0; rep < 20000; ++rep) {
      const int a = n_ss(rng);
      const int b = std::uniform_int_distribution<int>(1, 12 - a)(rng);
      std::vector<double> ss(a), ds(b);
      for (auto& v : ss) v = value(rng);
      for (auto& v : ds) v = value(rng);
      c.expect(eer_rocch(ss, ds) == oracle::eer_brute_force(ss, ds),
               fmt::format("fixture {} ({} ss, {} ds)", rep, a, b));
    }
  });

  criterion("PAV posteriors equal the isotonic fit", [](Check& c) {
    using L = TrialLabel;
    const std::vector<L> l{L::kDifferentSpeakers, L::kSameSpeaker, L::kDifferentSpeakers,
                           L::kSameSpeaker};
    c.expect(pav_posteriors(std::vector<double>{1, 2, 3, 4}, l) ==
                 std::vector<double>{0.0, 0.5, 0.5, 1.0},
             "[ds,ss,ds,ss]");
    std::mt19937_64 rng(104);
    std::uniform_int_distribution<int> size(1, 8), value(0, 5), coin(0, 1);
    for (int rep = 0; rep < 20000; ++rep) {
      const int n = size(rng);
      std::vector<double> s(n);
      std::vector<int> is_ss(n);
      std::vector<L> labels(n);
      for (int i = 0; i < n; ++i) {
        s[i] = value(rng);
        is_ss[i] = coin(rng);
        labels[i] = is_ss[i] ? L::kSameSpeaker : L::kDifferentSpeakers;
      }
      const auto got = pav_posteriors(s, labels);
      const auto want = oracle::isotonic(s, is_ss);
      for (int i = 0; i < n; ++i) {
        c.expect(got[i] == want[i].value(), fmt::format("fixture {} point {}", rep, i));
      }
    }
  });

  criterion("leave-out calibration equals the brute-force oracle", [](Check& c) {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto scores = six_speaker_scores(seed);
      std::vector<oracle::LooTrial> trials;
      for (const auto& st : scores.trials) {
        trials.push_back({st.trial.questioned_id, st.trial.questioned_speaker,
                          st.trial.known_speaker, st.trial.same_speaker(), st.score});
      }
      for (auto policy : {DsExclusion::kExcludeLeftOutSpeakers, DsExclusion::kUtteranceOnly}) {
        CalibrationOptions o;
        o.ds_exclusion = policy;
        const auto got = loo_calibrate(scores, o);
        const auto want =
            oracle::loo_log10_lr(trials, policy == DsExclusion::kExcludeLeftOutSpeakers);
        for (std::size_t i = 0; i < want.size(); ++i) {
          c.expect(std::abs(got.trials[i].log10_lr - want[i]) < 1e-12,
                   fmt::format("seed {} {} trial {}", seed, to_string(policy), i));
        }
      }
    }
  });

  criterion("normalization invariances", [](Check& c) {
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-5.0, 5.0);
    const auto random_map = [&](std::size_t dim) {
      std::pair<std::vector<double>, std::vector<double>> ab{std::vector<double>(dim),
                                                             std::vector<double>(dim)};
      for (auto& v : ab.first) v = scale(rng);
      for (auto& v : ab.second) v = shift(rng);
      return ab;
    };
    const auto ds = fixture::small_synthetic(9);
    ScoringOptions full;
    full.adaptive_cohort_size = ds.manifest.select(Partition::kTrain).size();
    const auto sys3 = score_trials(SystemTag::kSys3, ds);
    const auto sys4 = score_trials(SystemTag::kSys4, ds, full);
    for (int rep = 0; rep < 100; ++rep) {
      const auto [alpha, beta] = random_map(ds.embeddings.dim());
      const auto mapped = affine(ds, alpha, beta);
      const auto t3 = score_trials(SystemTag::kSys3, mapped);
      const auto t4 = score_trials(SystemTag::kSys4, mapped, full);
      for (std::size_t i = 0; i < sys3.trials.size(); ++i) {
        c.expect(std::abs(t3.trials[i].score - sys3.trials[i].score) < 1e-9,
                 fmt::format("SYS3 rep {} trial {}", rep, i));
        c.expect(std::abs(t4.trials[i].score - sys4.trials[i].score) < 1e-9,
                 fmt::format("SYS4 rep {} trial {}", rep, i));
      }
    }

    // The z-normalized cosine on a fixed selected cohort.
    std::normal_distribution<double> n;
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t dim = 12;
      std::vector<Embedding> cohort(20);
      for (std::size_t j = 0; j < cohort.size(); ++j) {
        cohort[j].recording_id = fmt::format("c{}", j);
        for (std::size_t d = 0; d < dim; ++d) cohort[j].vector.push_back(n(rng));
      }
      Embedding q{"q", {}}, k{"k", {}};
      for (std::size_t d = 0; d < dim; ++d) {
        q.vector.push_back(n(rng));
        k.vector.push_back(n(rng));
      }
      const auto chosen = adaptive_cohort(q, cohort, 8);
      const auto score = [](const Embedding& a, const Embedding& b,
                            const std::vector<Embedding>& sel) {
        const auto st = cohort_stats(sel);
        return cosine_score(znorm_embedding(a, st), znorm_embedding(b, st));
      };
      const double base = score(q, k, chosen);
      const auto [alpha, beta] = random_map(dim);
      const auto map = [&](Embedding e) {
        for (std::size_t d = 0; d < dim; ++d) e.vector[d] = alpha[d] * e.vector[d] + beta[d];
        return e;
      };
      std::vector<Embedding> mapped_sel;
      for (const auto& e : chosen) mapped_sel.push_back(map(e));
      c.expect(std::abs(score(map(q), map(k), mapped_sel) - base) < 1e-9,
               fmt::format("fixed-cohort z-norm rep {}", rep));
    }

    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> qc(30), kc(30);
      for (auto& v : qc) v = n(rng) * 0.2;
      for (auto& v : kc) v = n(rng) * 0.2;
      const double raw = n(rng) * 0.3;
      const double a = scale(rng), b = shift(rng);
      const auto map = [&](std::vector<double> v) {
        for (auto& x : v) x = a * x + b;
        return v;
      };
      const double base = snorm_score(raw, qc, kc);
      c.expect(std::abs(snorm_score(a * raw + b, map(qc), map(kc)) - base) < 1e-9,
               fmt::format("S-norm rep {}", rep));
    }
  });

  criterion("separation sanity on synthetic speakers", [](Check& c) {
    const auto dir = fixture::temp_dir("acceptance_separation");
    const auto clean = synthetic_run(dir / "clean", 0.0);
    cmd_synth(clean);
    const auto t0 = Clock::now();
    const auto r = cmd_run(clean);
    const double t = seconds_since(t0);
    c.expect(t < 60.0, fmt::format("4-system run over 60 speakers took {:.1f} s", t));
    for (auto tag : kAllSystems) {
      const auto& rep = report_of(r, tag);
      c.expect(rep.eer == 0.0, fmt::format("{} EER {}", to_string(tag), rep.eer));
      c.expect(rep.cllr_pooled < 0.05,
               fmt::format("{} Cllr_pooled {}", to_string(tag), rep.cllr_pooled));
    }

    const auto shifted = synthetic_run(dir / "shifted", 60.0);
    cmd_synth(shifted);
    const auto s = cmd_run(shifted);
    const double base = report_of(s, SystemTag::kSys1).cllr_pooled;
    for (auto tag : {SystemTag::kSys2, SystemTag::kSys3, SystemTag::kSys4}) {
      const double v = report_of(s, tag).cllr_pooled;
      c.expect(v < base, fmt::format("{} Cllr_pooled {} not below SYS1 {}", to_string(tag), v,
                                     base));
    }
  });

  criterion("report consistency and comparison order", [](Check& c) {
    const auto dir = fixture::temp_dir("acceptance_reports");
    for (double noise : {0.3, 0.6, 1.0}) {
      RunConfig cfg;
      cfg.manifest = dir / "manifest.csv";
      cfg.embeddings = dir / "embeddings.txt";
      cfg.output_dir = dir / fmt::format("out_{}", noise);
      cfg.adaptive_cohort_size = 10;
      cfg.synth = {10, 10, 2, 16, noise, 0.0};
      cmd_synth(cfg);
      check_reports(c, cfg, cmd_run(cfg));
    }
    // With one system failing, the remaining reports still hold.
    RunConfig cfg;
    cfg.manifest = dir / "manifest.csv";
    cfg.embeddings = dir / "embeddings.txt";
    cfg.output_dir = dir / "out_partial";
    cfg.adaptive_cohort_size = 1000;
    check_reports(c, cfg, cmd_run(cfg));
  });

  std::cout << (g_failed == 0 ? "all criteria passed" : fmt::format("{} criteria failed", g_failed))
            << "\n";
  return g_failed == 0 ? 0 : 1;
}
