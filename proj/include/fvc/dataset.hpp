#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fvc {

enum class Condition { kQuestioned, kKnown };
enum class Partition { kTrain, kTest };
enum class TrialLabel { kSameSpeaker, kDifferentSpeakers };

std::string_view to_string(Condition c) noexcept;
std::string_view to_string(Partition p) noexcept;
// "ss" / "ds", the spelling used in score and LR files.
std::string_view to_string(TrialLabel l) noexcept;

struct RecordingMeta {
  std::string recording_id;
  std::string speaker_id;
  int session = 1;
  Condition condition = Condition::kQuestioned;
  Partition partition = Partition::kTest;
};

struct Embedding {
  std::string recording_id;
  std::vector<double> vector;
};

// Immutable collection of embeddings sharing one dimension. Construction
// rejects non-finite components, zero-norm vectors, mixed dimensions and
// duplicate ids.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(std::vector<Embedding> embeddings);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  std::span<const Embedding> items() const noexcept { return items_; }
  const Embedding* find(std::string_view recording_id) const;
  const Embedding& at(std::string_view recording_id) const;

 private:
  std::size_t dim_ = 0;
  std::vector<Embedding> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Manifest {
  std::vector<RecordingMeta> records;
  std::size_t embedding_dim = 0;
  std::string source_note;

  const RecordingMeta* find(std::string_view recording_id) const;
  std::vector<const RecordingMeta*> select(Partition p) const;
  std::vector<const RecordingMeta*> select(Partition p, Condition c) const;
};

// A manifest resolved against its embeddings.
struct Dataset {
  Manifest manifest;
  EmbeddingSet embeddings;
};

struct Trial {
  std::string questioned_id;
  std::string known_id;
  std::string questioned_speaker;
  std::string known_speaker;
  TrialLabel label = TrialLabel::kDifferentSpeakers;

  bool same_speaker() const noexcept { return label == TrialLabel::kSameSpeaker; }
};

// Reads the manifest CSV alone. Leading '#' lines become the source note.
// Checks id uniqueness and that the test partition holds both conditions.
Manifest parse_manifest(const std::filesystem::path& path);
Manifest parse_manifest_text(std::string_view text);

// Text matrix unless the extension is ".bin", in which case the raw float32
// records are read together with the "<path>.idx" index file.
EmbeddingSet read_embeddings(const std::filesystem::path& path);

// Fails with a resolution error naming the first record lacking an embedding.
void resolve(Manifest& manifest, const EmbeddingSet& embeddings);

Dataset load_dataset(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& embeddings_path);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
// Format chosen by extension, as in read_embeddings.
void write_embeddings(const EmbeddingSet& embeddings,
                      const std::filesystem::path& path);

// Questioned test recordings crossed with known test recordings, sorted by
// questioned id then known id.
std::vector<Trial> enumerate_trials(const Manifest& manifest);

struct SynthOptions {
  int n_speakers = 60;  // test-partition speakers
  int n_train_speakers = 60;
  int sessions_per_speaker = 3;
  int dim = 192;
  // Added to every questioned-condition embedding. Empty means no offset.
  std::vector<double> channel_offset;
  // Per-dimension standard deviation of session noise. Speaker means have
  // unit per-dimension variance.
  double noise_scale = 0.05;
  std::uint64_t seed = 1;
};

// Each speaker session yields one questioned and one known recording.
Dataset synthesize_dataset(const SynthOptions& options);

// Unit vector of the given dimension drawn from the seed.
std::vector<double> random_direction(int dim, std::uint64_t seed);

}  // namespace fvc
