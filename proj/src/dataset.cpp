#include "fvc/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "fvc/error.hpp"
#include "text_io.hpp"

namespace fvc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary embedding files assume a little-endian host");

constexpr std::string_view kManifestHeader =
    "recording_id,speaker_id,session,condition,partition";

Condition parse_condition(std::string_view s, std::size_t line) {
  if (s == "questioned") return Condition::kQuestioned;
  if (s == "known") return Condition::kKnown;
  throw Error(ErrorKind::kParse,
              fmt::format("manifest line {}: bad condition '{}'", line, s));
}

Partition parse_partition(std::string_view s, std::size_t line) {
  if (s == "train") return Partition::kTrain;
  if (s == "test") return Partition::kTest;
  throw Error(ErrorKind::kParse,
              fmt::format("manifest line {}: bad partition '{}'", line, s));
}

bool is_binary_path(const std::filesystem::path& path) {
  return path.extension() == ".bin";
}

std::filesystem::path index_path(const std::filesystem::path& path) {
  auto idx = path;
  idx += ".idx";
  return idx;
}

void check_embedding(const Embedding& e, std::size_t dim) {
  if (e.recording_id.empty()) {
    throw Error(ErrorKind::kValidation, "embedding with empty recording_id");
  }
  if (e.vector.size() != dim) {
    throw Error(ErrorKind::kValidation,
                fmt::format("embedding '{}' has dimension {}, expected {}",
                            e.recording_id, e.vector.size(), dim));
  }
  double norm2 = 0.0;
  for (double v : e.vector) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("embedding '{}' has a non-finite component",
                              e.recording_id));
    }
    norm2 += v * v;
  }
  if (norm2 == 0.0) {
    throw Error(ErrorKind::kValidation,
                fmt::format("embedding '{}' has zero norm", e.recording_id));
  }
}

EmbeddingSet read_text_embeddings(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<Embedding> items;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const auto line = detail::trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() < 2) {
      throw Error(ErrorKind::kParse,
                  fmt::format("{}:{}: expected recording_id followed by values",
                              path.string(), line_no));
    }
    Embedding e;
    e.recording_id = std::string(detail::trim(fields[0]));
    e.vector.reserve(fields.size() - 1);
    const auto ctx = fmt::format("{}:{}", path.string(), line_no);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      e.vector.push_back(detail::parse_double(fields[i], ctx));
    }
    items.push_back(std::move(e));
  }
  return EmbeddingSet(std::move(items));
}

EmbeddingSet read_binary_embeddings(const std::filesystem::path& path) {
  const std::string index = detail::read_file(index_path(path));
  const auto lines = detail::split(index, '\n');
  if (lines.empty() || !detail::trim(lines[0]).starts_with("dim ")) {
    throw Error(ErrorKind::kParse,
                fmt::format("{}: first line must be 'dim <D>'",
                            index_path(path).string()));
  }
  const long dim = detail::parse_long(detail::trim(lines[0]).substr(4),
                                      index_path(path).string());
  if (dim <= 0) {
    throw Error(ErrorKind::kParse, "binary embeddings: dimension must be positive");
  }
  std::vector<std::string> ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto id = detail::trim(lines[i]);
    if (!id.empty()) ids.emplace_back(id);
  }

  const std::string blob = detail::read_file(path);
  const std::size_t record_bytes = static_cast<std::size_t>(dim) * sizeof(float);
  if (blob.size() != ids.size() * record_bytes) {
    throw Error(ErrorKind::kParse,
                fmt::format("{}: size {} does not match {} records of dimension {}",
                            path.string(), blob.size(), ids.size(), dim));
  }
  std::vector<Embedding> items;
  items.reserve(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    Embedding e;
    e.recording_id = ids[r];
    e.vector.resize(static_cast<std::size_t>(dim));
    for (long d = 0; d < dim; ++d) {
      float f = 0.0f;
      std::memcpy(&f, blob.data() + r * record_bytes + d * sizeof(float),
                  sizeof(float));
      e.vector[static_cast<std::size_t>(d)] = f;
    }
    items.push_back(std::move(e));
  }
  return EmbeddingSet(std::move(items));
}

}  // namespace

std::string_view to_string(Condition c) noexcept {
  return c == Condition::kQuestioned ? "questioned" : "known";
}

std::string_view to_string(Partition p) noexcept {
  return p == Partition::kTrain ? "train" : "test";
}

std::string_view to_string(TrialLabel l) noexcept {
  return l == TrialLabel::kSameSpeaker ? "ss" : "ds";
}

EmbeddingSet::EmbeddingSet(std::vector<Embedding> embeddings)
    : items_(std::move(embeddings)) {
  if (items_.empty()) return;
  dim_ = items_.front().vector.size();
  if (dim_ == 0) {
    throw Error(ErrorKind::kValidation, "embeddings must have dimension >= 1");
  }
  index_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    check_embedding(items_[i], dim_);
    if (!index_.emplace(items_[i].recording_id, i).second) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("duplicate embedding for recording_id '{}'",
                              items_[i].recording_id));
    }
  }
}

const Embedding* EmbeddingSet::find(std::string_view recording_id) const {
  const auto it = index_.find(std::string(recording_id));
  return it == index_.end() ? nullptr : &items_[it->second];
}

const Embedding& EmbeddingSet::at(std::string_view recording_id) const {
  const auto* e = find(recording_id);
  if (e == nullptr) {
    throw Error(ErrorKind::kResolution,
                fmt::format("no embedding for recording_id '{}'", recording_id));
  }
  return *e;
}

const RecordingMeta* Manifest::find(std::string_view recording_id) const {
  for (const auto& r : records) {
    if (r.recording_id == recording_id) return &r;
  }
  return nullptr;
}

std::vector<const RecordingMeta*> Manifest::select(Partition p) const {
  std::vector<const RecordingMeta*> out;
  for (const auto& r : records) {
    if (r.partition == p) out.push_back(&r);
  }
  return out;
}

std::vector<const RecordingMeta*> Manifest::select(Partition p, Condition c) const {
  std::vector<const RecordingMeta*> out;
  for (const auto& r : records) {
    if (r.partition == p && r.condition == c) out.push_back(&r);
  }
  return out;
}

Manifest parse_manifest_text(std::string_view text) {
  Manifest m;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::unordered_set<std::string> ids;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = detail::trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!header_seen) {
        if (!m.source_note.empty()) m.source_note += '\n';
        m.source_note += detail::trim(line.substr(1));
      }
      continue;
    }
    if (!header_seen) {
      if (line != kManifestHeader) {
        throw Error(ErrorKind::kParse,
                    fmt::format("manifest line {}: expected header '{}'",
                                line_no, kManifestHeader));
      }
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 5) {
      throw Error(ErrorKind::kParse,
                  fmt::format("manifest line {}: expected 5 fields, found {}",
                              line_no, f.size()));
    }
    RecordingMeta r;
    r.recording_id = std::string(detail::trim(f[0]));
    r.speaker_id = std::string(detail::trim(f[1]));
    if (r.recording_id.empty() || r.speaker_id.empty()) {
      throw Error(ErrorKind::kParse,
                  fmt::format("manifest line {}: empty id", line_no));
    }
    const long session =
        detail::parse_long(f[2], fmt::format("manifest line {}", line_no));
    if (session < 1) {
      throw Error(ErrorKind::kParse,
                  fmt::format("manifest line {}: session must be >= 1", line_no));
    }
    r.session = static_cast<int>(session);
    r.condition = parse_condition(detail::trim(f[3]), line_no);
    r.partition = parse_partition(detail::trim(f[4]), line_no);
    if (!ids.insert(r.recording_id).second) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("manifest line {}: duplicate recording_id '{}'",
                              line_no, r.recording_id));
    }
    m.records.push_back(std::move(r));
  }
  if (!header_seen) {
    throw Error(ErrorKind::kParse, "manifest is empty (no header line)");
  }
  if (m.select(Partition::kTest, Condition::kQuestioned).empty() ||
      m.select(Partition::kTest, Condition::kKnown).empty()) {
    throw Error(ErrorKind::kValidation,
                "manifest test partition needs at least one questioned and one "
                "known recording");
  }
  return m;
}

Manifest parse_manifest(const std::filesystem::path& path) {
  return parse_manifest_text(detail::read_file(path));
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  return is_binary_path(path) ? read_binary_embeddings(path)
                              : read_text_embeddings(path);
}

void resolve(Manifest& manifest, const EmbeddingSet& embeddings) {
  for (const auto& r : manifest.records) {
    if (embeddings.find(r.recording_id) == nullptr) {
      throw Error(ErrorKind::kResolution,
                  fmt::format("recording '{}' has no embedding", r.recording_id));
    }
  }
  manifest.embedding_dim = embeddings.dim();
}

Dataset load_dataset(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& embeddings_path) {
  Dataset ds;
  ds.manifest = parse_manifest(manifest_path);
  if (!std::filesystem::exists(embeddings_path)) {
    throw Error(ErrorKind::kResolution,
                fmt::format("embedding file '{}' not found",
                            embeddings_path.string()));
  }
  ds.embeddings = read_embeddings(embeddings_path);
  resolve(ds.manifest, ds.embeddings);
  return ds;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::string out;
  if (!manifest.source_note.empty()) {
    for (const auto line : detail::split(manifest.source_note, '\n')) {
      out += fmt::format("# {}\n", line);
    }
  }
  out += kManifestHeader;
  out += '\n';
  for (const auto& r : manifest.records) {
    out += fmt::format("{},{},{},{},{}\n", r.recording_id, r.speaker_id,
                       r.session, to_string(r.condition), to_string(r.partition));
  }
  detail::write_file(path, out);
}

void write_embeddings(const EmbeddingSet& embeddings,
                      const std::filesystem::path& path) {
  if (is_binary_path(path)) {
    std::string index = fmt::format("dim {}\n", embeddings.dim());
    std::string blob;
    blob.reserve(embeddings.size() * embeddings.dim() * sizeof(float));
    for (const auto& e : embeddings.items()) {
      index += e.recording_id;
      index += '\n';
      for (double v : e.vector) {
        const float f = static_cast<float>(v);
        char bytes[sizeof(float)];
        std::memcpy(bytes, &f, sizeof(float));
        blob.append(bytes, sizeof(float));
      }
    }
    detail::write_file(index_path(path), index);
    detail::write_file(path, blob);
    return;
  }
  std::string out;
  for (const auto& e : embeddings.items()) {
    out += e.recording_id;
    for (double v : e.vector) {
      out += ',';
      out += detail::format_double(v);
    }
    out += '\n';
  }
  detail::write_file(path, out);
}

std::vector<Trial> enumerate_trials(const Manifest& manifest) {
  auto questioned = manifest.select(Partition::kTest, Condition::kQuestioned);
  auto known = manifest.select(Partition::kTest, Condition::kKnown);
  if (questioned.empty() || known.empty()) {
    throw Error(ErrorKind::kValidation,
                "empty partition: test set needs questioned and known recordings");
  }
  const auto by_id = [](const RecordingMeta* a, const RecordingMeta* b) {
    return a->recording_id < b->recording_id;
  };
  std::sort(questioned.begin(), questioned.end(), by_id);
  std::sort(known.begin(), known.end(), by_id);

  std::vector<Trial> trials;
  trials.reserve(questioned.size() * known.size());
  for (const auto* q : questioned) {
    for (const auto* k : known) {
      Trial t;
      t.questioned_id = q->recording_id;
      t.known_id = k->recording_id;
      t.questioned_speaker = q->speaker_id;
      t.known_speaker = k->speaker_id;
      t.label = q->speaker_id == k->speaker_id ? TrialLabel::kSameSpeaker
                                               : TrialLabel::kDifferentSpeakers;
      trials.push_back(std::move(t));
    }
  }
  return trials;
}

std::vector<double> random_direction(int dim, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorKind::kArgument, "direction dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

Dataset synthesize_dataset(const SynthOptions& o) {
  if (o.n_speakers < 2) {
    throw Error(ErrorKind::kArgument, "synthesize_dataset: n_speakers must be >= 2");
  }
  if (o.n_train_speakers < 0) {
    throw Error(ErrorKind::kArgument,
                "synthesize_dataset: n_train_speakers must be >= 0");
  }
  if (o.sessions_per_speaker < 1) {
    throw Error(ErrorKind::kArgument,
                "synthesize_dataset: sessions_per_speaker must be >= 1");
  }
  if (o.dim < 2) {
    throw Error(ErrorKind::kArgument, "synthesize_dataset: dim must be >= 2");
  }
  if (!(o.noise_scale > 0.0) || !std::isfinite(o.noise_scale)) {
    throw Error(ErrorKind::kArgument,
                "synthesize_dataset: noise_scale must be positive");
  }
  const auto dim = static_cast<std::size_t>(o.dim);
  if (!o.channel_offset.empty() && o.channel_offset.size() != dim) {
    throw Error(ErrorKind::kArgument,
                "synthesize_dataset: channel_offset dimension mismatch");
  }

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, o.noise_scale);

  Dataset ds;
  ds.manifest.source_note = fmt::format(
      "synthetic: speakers={} train_speakers={} sessions={} dim={} "
      "noise_scale={} offset_norm={} seed={}",
      o.n_speakers, o.n_train_speakers, o.sessions_per_speaker, o.dim,
      detail::format_double(o.noise_scale),
      detail::format_double(std::sqrt(std::transform_reduce(
          o.channel_offset.begin(), o.channel_offset.end(), o.channel_offset.begin(), 0.0))),
      o.seed);
  std::vector<Embedding> embeddings;

  const auto add_speaker = [&](const std::string& speaker, Partition partition) {
    std::vector<double> mean(dim);
    for (auto& m : mean) m = unit(rng);
    for (int s = 1; s <= o.sessions_per_speaker; ++s) {
      for (const auto condition : {Condition::kQuestioned, Condition::kKnown}) {
        RecordingMeta r;
        r.speaker_id = speaker;
        r.session = s;
        r.condition = condition;
        r.partition = partition;
        r.recording_id = fmt::format(
            "{}_{}_{}", speaker, s, condition == Condition::kQuestioned ? "q" : "k");
        Embedding e;
        e.recording_id = r.recording_id;
        e.vector.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
          e.vector[d] = mean[d] + noise(rng);
          if (condition == Condition::kQuestioned && !o.channel_offset.empty()) {
            e.vector[d] += o.channel_offset[d];
          }
        }
        ds.manifest.records.push_back(std::move(r));
        embeddings.push_back(std::move(e));
      }
    }
  };

  for (int i = 1; i <= o.n_speakers; ++i) {
    add_speaker(fmt::format("S{:03d}", i), Partition::kTest);
  }
  for (int i = 1; i <= o.n_train_speakers; ++i) {
    add_speaker(fmt::format("T{:03d}", i), Partition::kTrain);
  }
  ds.embeddings = EmbeddingSet(std::move(embeddings));
  resolve(ds.manifest, ds.embeddings);
  return ds;
}

}  // namespace fvc
