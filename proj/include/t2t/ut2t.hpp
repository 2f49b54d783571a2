#pragma once

#include <optional>
#include <vector>

#include "t2t/encoder.hpp"

namespace t2t {

/// Decoder recurrent state plus the embedding of the previously emitted
/// word, which is the input of the next step. `prev_context` is the
/// previous attention context when input feeding is on.
struct DecoderState {
  LstmState lstm;
  Var prev_embedding;
  Var prev_context;
};

/// The decoder LSTM update shared by both heads.
LstmState decoder_lstm(const Network& net, const DecoderState& state);
/// Initial state: encoder final state, learned start embedding, zero context.
DecoderState initial_decoder_state(const Network& net, const EncoderOutput& enc);

/// Tape handles for one decoder step.
struct Ut2tStep {
  Var attention;    ///< over source positions
  Var vocab_probs;  ///< over the output vocabulary
  Var gate;         ///< p_gen, shape [1]
  Var context;      ///< attention-weighted encoder states
  LstmState lstm;   ///< decoder state after this step
};

/// Plain values of one step. `final` covers the vocabulary followed by
/// the source words that are not in it (`SourceView::distinct` order).
struct StepDistribution {
  std::vector<Real> attention;
  std::vector<Real> vocab_probs;
  Real gate = 0;
  std::vector<Real> final;
  std::vector<std::string> extra_words;
};

struct LossTrace {
  Words inputs;            ///< word fed to each step after the first
  std::size_t clamped = 0; ///< target probabilities that hit the floor
};

struct Ut2tDecodeResult {
  Words tokens;  ///< includes the terminating <eos> unless truncated
  bool truncated = false;
};

/// Pointer-generator decoder over the flattened frame sequence.
class Ut2tDecoder {
 public:
  Ut2tDecoder(const Network& net, const Vocab& vocab);

  DecoderState initial_state(const EncoderOutput& enc) const;
  Ut2tStep step(const DecoderState& state, const EncoderOutput& enc) const;
  /// Combines the step's vocabulary and copy distributions.
  StepDistribution distribution(const Ut2tStep& step, const SourceView& source) const;

  /// Teacher-forced sum of -log P(target word).
  Var loss(const Words& target, const EncoderOutput& enc, const SourceView& source, LossTrace* trace = nullptr) const;

  Ut2tDecodeResult decode_greedy(const EncoderOutput& enc, const SourceView& source, std::size_t max_len) const;

  /// Replaces p_gen by a constant (diagnostics and tests).
  void force_gate(std::optional<Real> value) { forced_gate_ = value; }

 private:
  Var embed_word(const std::string& word) const;

  const Network* net_;
  const Vocab* vocab_;
  std::optional<Real> forced_gate_;
};

}  // namespace t2t
