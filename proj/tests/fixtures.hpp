#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fvc/calibration.hpp"
#include "fvc/dataset.hpp"
#include "fvc/scoring.hpp"

namespace fixture {

inline fvc::Trial trial(std::string q_spk, std::string k_spk, std::string q_id,
                        std::string k_id) {
  fvc::Trial t;
  t.questioned_id = std::move(q_id);
  t.known_id = std::move(k_id);
  t.label = q_spk == k_spk ? fvc::TrialLabel::kSameSpeaker
                           : fvc::TrialLabel::kDifferentSpeakers;
  t.questioned_speaker = std::move(q_spk);
  t.known_speaker = std::move(k_spk);
  return t;
}

// Trials with unique recordings and speakers: same-speaker values first.
inline fvc::TrialScoreSet scores(const std::vector<double>& ss, const std::vector<double>& ds) {
  fvc::TrialScoreSet out;
  std::size_t i = 0;
  for (double s : ss) {
    const auto spk = fmt::format("A{:04}", i);
    out.trials.push_back({trial(spk, spk, fmt::format("q{:04}", i), fmt::format("k{:04}", i)), s});
    ++i;
  }
  for (double s : ds) {
    out.trials.push_back({trial(fmt::format("A{:04}", i), fmt::format("B{:04}", i),
                                fmt::format("q{:04}", i), fmt::format("k{:04}", i)),
                          s});
    ++i;
  }
  return out;
}

inline fvc::LRSet lrs(const std::vector<double>& ss_llr, const std::vector<double>& ds_llr) {
  fvc::LRSet out;
  for (const auto& st : scores(ss_llr, ds_llr).trials) out.trials.push_back({st.trial, st.score});
  return out;
}

inline std::vector<double> llrs_of(const fvc::LRSet& l, bool same) {
  std::vector<double> out;
  for (const auto& t : l.trials) {
    if (t.trial.same_speaker() == same) out.push_back(t.log10_lr);
  }
  return out;
}

inline std::vector<double> lrs_of(const fvc::LRSet& l, bool same) {
  auto out = llrs_of(l, same);
  for (auto& v : out) v = std::pow(10.0, v);
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fvc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Manifest text with 423 train recordings of 105 speakers (191 questioned,
// 232 known) and 223 test recordings of 61 speakers (61 questioned, 162
// known), arranged so that 111 of the 9882 test pairs are same-speaker.
inline std::string counts_manifest_text() {
  std::string out = "recording_id,speaker_id,session,condition,partition\n";
  const auto add = [&](const std::string& spk, int nq, int nk, const char* part) {
    for (int i = 1; i <= nq; ++i) {
      out += fmt::format("{}_q{},{},{},questioned,{}\n", spk, i, spk, i, part);
    }
    for (int i = 1; i <= nk; ++i) {
      out += fmt::format("{}_k{},{},{},known,{}\n", spk, i, spk, i, part);
    }
  };
  for (int s = 0; s < 105; ++s) {
    add(fmt::format("T{:03}", s), 1 + (s < 86), 2 + (s < 22), "train");
  }
  int s = 0;
  for (int i = 0; i < 10; ++i) add(fmt::format("S{:03}", s++), 2, 1, "test");
  for (int i = 0; i < 41; ++i) add(fmt::format("S{:03}", s++), 1, i < 32 ? 2 : 3, "test");
  for (int i = 0; i < 10; ++i) add(fmt::format("S{:03}", s++), 0, i < 9 ? 6 : 7, "test");
  return out;
}

// Unit-norm-free random embeddings for every record of the manifest.
inline fvc::EmbeddingSet random_embeddings(const fvc::Manifest& m, std::size_t dim,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<fvc::Embedding> out;
  for (const auto& r : m.records) {
    fvc::Embedding e{r.recording_id, std::vector<double>(dim)};
    for (auto& v : e.vector) v = n(rng);
    out.push_back(std::move(e));
  }
  return fvc::EmbeddingSet(std::move(out));
}

inline fvc::Dataset small_synthetic(std::uint64_t seed, double noise = 0.5,
                                    int speakers = 8, int dim = 16) {
  fvc::SynthOptions o;
  o.n_speakers = speakers;
  o.n_train_speakers = speakers;
  o.sessions_per_speaker = 2;
  o.dim = dim;
  o.noise_scale = noise;
  o.seed = seed;
  return fvc::synthesize_dataset(o);
}

}  // namespace fixture
