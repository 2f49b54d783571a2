#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "t2t/config.hpp"
#include "t2t/corpus.hpp"
#include "t2t/numerics.hpp"
#include "t2t/tape.hpp"
#include "t2t/vocab.hpp"

namespace t2t {

/// Creates every parameter of a model with the given decoder head.
/// Matrices, embeddings and gate vectors ~ U(-init_scale, init_scale),
/// biases zero, LSTM forget-gate bias one.
ParamStore init_params(const TrainConfig& config, std::size_t vocab_size, std::uint64_t seed);

/// Training-time regularisation. Inactive when `rng` is null.
struct Noise {
  double dropout = 0.0;
  std::mt19937_64* rng = nullptr;

  bool active() const { return rng != nullptr && dropout > 0.0; }
};

/// The parameters of one model bound onto one tape.
class Network {
 public:
  Network(Tape& tape, const ParamStore& params, const TrainConfig& config, Noise noise = {});

  Tape& tape() const { return *tape_; }
  const TrainConfig& config() const { return *config_; }
  const ParamStore& params() const { return *params_; }

  Var param(const std::string& name) const { return tape_->param(*params_, name); }
  Var embed(int id) const { return embedding_lookup(param("embedding"), static_cast<std::size_t>(id)); }
  /// Dropout when noise is active, identity otherwise.
  Var regularize(Var x) const;
  LstmCell cell(const std::string& prefix) const;

 private:
  Tape* tape_;
  const ParamStore* params_;
  const TrainConfig* config_;
  Noise noise_;
};

/// Encoder states h_1..h_n plus the state that seeds the decoder.
struct EncoderOutput {
  std::vector<Var> states;
  Var memory;  ///< states stacked as an [n x H] matrix
  LstmState final;
};

/// Shared utterance/name encoder: embedding lookup followed by a
/// single-layer LSTM (optionally bidirectional, directions summed).
class Encoder {
 public:
  explicit Encoder(const Network& net) : net_(&net) {}

  EncoderOutput encode(std::span<const int> ids) const;
  EncoderOutput encode_utterance(const Words& tokens, const Vocab& vocab) const;
  /// Max-pool over time of the encoder states of a name.
  Var encode_name(std::span<const int> ids) const;
  Var encode_name(const Words& words, const Vocab& vocab) const;

 private:
  std::vector<Var> run(std::span<const int> ids, LstmState* final) const;

  const Network* net_;
};

/// Copy bookkeeping for one utterance: each position maps to the index of
/// its distinct word, or -1 for separator tokens, which are never copied.
///
/// Words in `hidden` are treated as out of vocabulary everywhere the
/// decoders look them up; training uses this to simulate unseen values.
struct SourceView {
  Words tokens;
  std::vector<int> ids;
  std::vector<int> group;
  Words distinct;
  std::set<std::string> hidden;

  static SourceView make(const Words& tokens, const Vocab& vocab, std::set<std::string> hidden = {});
  /// Vocabulary id of `word`, or <unk> if it is hidden or unknown.
  int id_of(const std::string& word, const Vocab& vocab) const;
  /// Positions holding `word`.
  std::vector<std::size_t> positions(const std::string& word) const;
};

}  // namespace t2t
