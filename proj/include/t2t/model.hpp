#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "t2t/config.hpp"
#include "t2t/corpus.hpp"
#include "t2t/ct2t.hpp"
#include "t2t/frames.hpp"
#include "t2t/ut2t.hpp"
#include "t2t/vocab.hpp"

namespace t2t {

/// Everything needed to rebuild a trained model.
struct Checkpoint {
  TrainConfig config;
  Vocab vocab;
  Ontology ontology;
  ParamStore params;
  /// Domain labels seen in training, sorted; empty when unknown.
  std::vector<std::string> domains;

  DecoderKind kind() const { return config.decoder; }
};

/// Fresh, randomly initialised model.
Checkpoint make_model(const TrainConfig& config, Vocab vocab, Ontology ontology, std::uint64_t seed);

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout (all integers unsigned 32-bit little-endian):
///   "CT2T" | version | manifest length | manifest JSON (config, vocab,
///   ontology) | tensor count | per tensor: name length, name, rank, dims,
///   float32 little-endian values.
void write_checkpoint(const Checkpoint& ckpt, std::ostream& out);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
/// Throws DataError on bad magic, version, truncation, or a tensor layout
/// that does not match the manifest; ConfigError if `expected` is given
/// and the stored decoder kind differs.
Checkpoint read_checkpoint(std::istream& in, std::optional<DecoderKind> expected = std::nullopt);
Checkpoint load_checkpoint(const std::string& path, std::optional<DecoderKind> expected = std::nullopt);

/// Loss graph for one mini-batch on one tape. The ontology is encoded
/// once per batch.
class BatchGraph {
 public:
  BatchGraph(Tape& tape, const Checkpoint& model, Noise noise = {}, double word_dropout = 0.0);

  /// Teacher-forced loss of one example.
  Var loss(const TaggedExample& example);

  const Network& network() const { return net_; }

 private:
  const Checkpoint* model_;
  Network net_;
  Encoder encoder_;
  Noise noise_;
  double word_dropout_;
  std::optional<NameBank> bank_;
};

struct Prediction {
  Frame frame;
  Words output;  ///< flattened output sequence
  std::optional<ParseError> parse_error;
  bool truncated = false;
};

/// Greedy inference over a frozen checkpoint. Not thread-safe; use one
/// predictor per thread.
class Predictor {
 public:
  /// `ontology` overrides the checkpoint's ontology (CT2T only).
  explicit Predictor(const Checkpoint& model, std::optional<Ontology> ontology = std::nullopt);

  Prediction predict(const Words& tokens);
  const Ontology& ontology() const { return ontology_; }

 private:
  const Checkpoint* model_;
  Ontology ontology_;
  std::unique_ptr<Tape> tape_;
  std::unique_ptr<Network> net_;
  std::unique_ptr<Encoder> encoder_;
  std::optional<NameBank> bank_;
  std::size_t mark_ = 0;
};

}  // namespace t2t
