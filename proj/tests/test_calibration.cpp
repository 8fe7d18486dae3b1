#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "fvc/calibration.hpp"
#include "fvc/error.hpp"
#include "fvc/metrics.hpp"
#include "oracles.hpp"

using namespace fvc;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no fvc::Error thrown");
  return ErrorKind::kIo;
}

// Six speakers, two questioned and two known recordings each, all pairs.
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

std::vector<oracle::LooTrial> as_oracle(const TrialScoreSet& s) {
  std::vector<oracle::LooTrial> out;
  for (const auto& st : s.trials) {
    out.push_back({st.trial.questioned_id, st.trial.questioned_speaker, st.trial.known_speaker,
                   st.trial.same_speaker(), st.score});
  }
  return out;
}

}  // namespace

TEST_CASE("kernel density") {
  const KdeModel single({0.0, 0.0}, 1.0);
  CHECK(kde_density(single, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(std::abs(kde_density(single, 0.0) - 0.39894228) < 1e-8);

  const KdeModel sym({-1.0, 1.0}, 0.7);
  for (double x : {0.1, 0.5, 1.3, 4.0}) CHECK(sym.density(x) == sym.density(-x));

  const KdeModel m({-0.3, 0.1, 0.2, 0.9, 1.4});
  const double h = m.bandwidth();
  const double lo = -0.3 - 10 * h, hi = 1.4 + 10 * h;
  const int steps = 200000;
  const double dx = (hi - lo) / steps;
  double integral = 0.5 * (m.density(lo) + m.density(hi));
  for (int i = 1; i < steps; ++i) integral += m.density(lo + i * dx);
  integral *= dx;
  CHECK(std::abs(integral - 1.0) < 1e-6);

  for (double x : {-2.0, 0.0, 0.15, 3.0}) {
    CHECK(std::abs(std::log(m.density(x)) - m.log_density(x)) < 1e-12);
  }
  // Far tails underflow the plain density but not its logarithm.
  CHECK(m.density(1e3) == 0.0);
  CHECK(std::isfinite(m.log_density(1e3)));

  CHECK(kind_of([] { KdeModel({1.0}, 1.0); }) == ErrorKind::kInsufficientSupport);
  CHECK(kind_of([] { KdeModel({1.0, 2.0}, 0.0); }) == ErrorKind::kArgument);
}

TEST_CASE("Silverman bandwidth") {
  const std::vector<double> two{0.0, 1.0};
  // sd 0.5, IQR/1.34 = 0.5/1.34 with interpolated quartiles 0.25 and 0.75.
  const double expected = 0.9 * (0.5 / 1.34) * std::pow(2.0, -0.2);
  CHECK(select_bandwidth(two) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(std::abs(select_bandwidth(two) - 0.29235) < 1e-5);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  double prev = INFINITY;
  for (int size : {10, 100, 1000}) {
    std::vector<double> x(size);
    for (auto& v : x) v = n(rng);
    const double h = select_bandwidth(x);
    CHECK(h == doctest::Approx(oracle::silverman(x)).epsilon(1e-13));
    CHECK(h < prev);
    prev = h;
  }
  // Zero IQR falls back to the standard deviation.
  const std::vector<double> spike{0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  CHECK(select_bandwidth(spike) == doctest::Approx(oracle::silverman(spike)).epsilon(1e-14));
  CHECK(select_bandwidth(spike) > 0.0);
  CHECK(kind_of([] { select_bandwidth(std::vector<double>{0.0, 0.0, 0.0}); }) ==
        ErrorKind::kDegenerateSample);
  CHECK(kind_of([] { select_bandwidth(std::vector<double>{1.0}); }) ==
        ErrorKind::kInsufficientSupport);
}

TEST_CASE("leave-out calibration matches a brute-force oracle") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto scores = six_speaker_scores(seed);
    for (const auto policy : {DsExclusion::kExcludeLeftOutSpeakers, DsExclusion::kUtteranceOnly}) {
      CalibrationOptions o;
      o.ds_exclusion = policy;
      const auto lrs = loo_calibrate(scores, o);
      const auto expected = oracle::loo_log10_lr(
          as_oracle(scores), policy == DsExclusion::kExcludeLeftOutSpeakers);
      REQUIRE(lrs.trials.size() == expected.size());
      for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(std::abs(lrs.trials[i].log10_lr - expected[i]) < 1e-12);
        CHECK(lrs.trials[i].trial.known_id == scores.trials[i].trial.known_id);
      }
    }
  }
}

TEST_CASE("leave-out calibration ignores the left-out speakers' scores") {
  const auto scores = six_speaker_scores(4);
  const auto base = loo_calibrate(scores);
  for (std::size_t i = 0; i < scores.trials.size(); i += 7) {
    const auto& t = scores.trials[i].trial;
    auto perturbed = scores;
    for (std::size_t j = 0; j < perturbed.trials.size(); ++j) {
      const auto& o = perturbed.trials[j].trial;
      const bool left_out = o.questioned_speaker == t.questioned_speaker ||
                            o.questioned_speaker == t.known_speaker;
      if (j != i && o.same_speaker() && left_out) perturbed.trials[j].score += 0.05;
    }
    CHECK(loo_calibrate(perturbed).trials[i].log10_lr == base.trials[i].log10_lr);
  }
}

TEST_CASE("leave-out calibration properties") {
  const auto scores = six_speaker_scores(5);
  const auto base = loo_calibrate_detailed(scores);
  CHECK(base.lrs.n_ss() == 24);
  CHECK(base.lrs.n_ds() == 120);
  CHECK(base.ss_bandwidth.size() == scores.trials.size());
  for (const auto& t : base.lrs.trials) {
    CHECK(std::isfinite(t.log10_lr));
    CHECK(std::abs(t.log10_lr) <= 10.0);
    CHECK(t.lr() > 0.0);
  }

  SUBCASE("invariant under increasing affine maps of the scores") {
    for (const auto [a, b] : {std::pair{3.0, -1.0}, std::pair{0.2, 5.0}}) {
      auto t = scores;
      for (auto& st : t.trials) st.score = a * st.score + b;
      const auto lrs = loo_calibrate(t);
      for (std::size_t i = 0; i < lrs.trials.size(); ++i) {
        CHECK(std::abs(lrs.trials[i].log10_lr - base.lrs.trials[i].log10_lr) < 1e-9);
      }
    }
  }

  SUBCASE("clip bounds") {
    CalibrationOptions o;
    o.log10_lr_clip = 0.5;
    for (const auto& t : loo_calibrate(scores, o).trials) CHECK(std::abs(t.log10_lr) <= 0.5);
  }

  SUBCASE("too few speakers") {
    TrialScoreSet two;
    for (const auto& st : scores.trials) {
      const auto& t = st.trial;
      if ((t.questioned_speaker == "S0" || t.questioned_speaker == "S1") &&
          (t.known_speaker == "S0" || t.known_speaker == "S1")) {
        two.trials.push_back(st);
      }
    }
    try {
      loo_calibrate(two);
      FAIL("expected insufficient support");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInsufficientSupport);
      CHECK(std::string(e.what()).find("S0_q0") != std::string::npos);
    }
  }
}

TEST_CASE("well-separated synthetic data calibrates to the right side of 1") {
  const auto ds = fixture::small_synthetic(8, 0.05, 10, 32);
  const auto lrs = loo_calibrate(score_trials(SystemTag::kSys1, ds));
  for (const auto& t : lrs.trials) {
    if (t.trial.same_speaker()) {
      CHECK(t.log10_lr > 0.0);
    } else {
      CHECK(t.log10_lr < 0.0);
    }
  }
}

TEST_CASE("PAV posteriors") {
  using L = TrialLabel;
  const std::vector<double> s{1, 2, 3, 4};
  const std::vector<L> l{L::kDifferentSpeakers, L::kSameSpeaker, L::kDifferentSpeakers,
                         L::kSameSpeaker};
  CHECK(pav_posteriors(s, l) == std::vector<double>{0.0, 0.5, 0.5, 1.0});

  // Input order is preserved and ties share one value.
  const std::vector<double> s2{3, 1, 3, 2};
  const std::vector<L> l2{L::kSameSpeaker, L::kSameSpeaker, L::kDifferentSpeakers,
                          L::kDifferentSpeakers};
  CHECK(pav_posteriors(s2, l2) == std::vector<double>{0.5, 0.5, 0.5, 0.5});

  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> size(1, 8), value(0, 4), coin(0, 1);
  for (int rep = 0; rep < 500; ++rep) {
    const int n = size(rng);
    std::vector<double> scores(n);
    std::vector<int> is_ss(n);
    std::vector<L> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = value(rng);
      is_ss[i] = coin(rng);
      labels[i] = is_ss[i] ? L::kSameSpeaker : L::kDifferentSpeakers;
    }
    const auto got = pav_posteriors(scores, labels);
    const auto expected = oracle::isotonic(scores, is_ss);
    for (int i = 0; i < n; ++i) CHECK(got[i] == expected[i].value());
  }
}

TEST_CASE("PAV likelihood ratios") {
  SUBCASE("separated 50 + 50") {
    std::vector<double> ss, ds;
    for (int i = 0; i < 50; ++i) {
      ds.push_back(i * 0.01);
      ss.push_back(1.0 + i * 0.01);
    }
    const auto lrs = pav_llr(fixture::scores(ss, ds));
    const auto a = fixture::llrs_of(lrs, true), b = fixture::llrs_of(lrs, false);
    CHECK(*std::min_element(a.begin(), a.end()) > *std::max_element(b.begin(), b.end()));
    CHECK(cllr(lrs) < 0.01);
  }
  SUBCASE("non-decreasing in the score") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    std::vector<double> ss(200), ds(300);
    for (auto& v : ss) v = n(rng) + 1.0;
    for (auto& v : ds) v = n(rng);
    const auto set = fixture::scores(ss, ds);
    const auto lrs = pav_llr(set);
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < set.trials.size(); ++i) {
      pairs.emplace_back(set.trials[i].score, lrs.trials[i].log10_lr);
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i].second >= pairs[i - 1].second);
  }
  SUBCASE("identical scores give LR 1") {
    const auto lrs = pav_llr(fixture::scores({0.5, 0.5, 0.5}, {0.5, 0.5}));
    for (const auto& t : lrs.trials) CHECK(std::abs(t.log10_lr) < 1e-12);
  }
  SUBCASE("uninformative scores") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    std::vector<double> ss(500), ds(500);
    for (auto& v : ss) v = n(rng);
    for (auto& v : ds) v = n(rng);
    const double c = cllr(pav_llr(fixture::scores(ss, ds)));
    CHECK(c <= 1.0 + 1e-9);
    CHECK(c > 0.85);
  }
  SUBCASE("exactly invariant under increasing affine maps") {
    const std::vector<double> ss{0.3, 0.9, 0.1, 0.7}, ds{0.2, 0.0, 0.4};
    auto t = ss, u = ds;
    for (auto& v : t) v = 4.0 * v - 2.0;
    for (auto& v : u) v = 4.0 * v - 2.0;
    const auto a = pav_llr(fixture::scores(ss, ds));
    const auto b = pav_llr(fixture::scores(t, u));
    for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i].log10_lr == b.trials[i].log10_lr);
  }
  CHECK(kind_of([] { pav_llr(fixture::scores({1.0, 2.0}, {})); }) == ErrorKind::kArgument);
}

TEST_CASE("LR file round trip") {
  const auto dir = fixture::temp_dir("lrs_roundtrip");
  const auto ds = fixture::small_synthetic(9);
  const auto lrs = loo_calibrate(score_trials(SystemTag::kSys1, ds));
  write_lrs(lrs, dir / "l.csv");
  const auto back = read_lrs(dir / "l.csv", ds.manifest);
  REQUIRE(back.trials.size() == lrs.trials.size());
  for (std::size_t i = 0; i < lrs.trials.size(); ++i) {
    CHECK(back.trials[i].log10_lr == lrs.trials[i].log10_lr);
    CHECK(back.trials[i].trial.questioned_speaker == lrs.trials[i].trial.questioned_speaker);
  }
}
