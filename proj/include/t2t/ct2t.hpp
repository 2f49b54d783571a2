#pragma once

#include <optional>
#include <vector>

#include "t2t/ut2t.hpp"

namespace t2t {

/// Encoded ontology. The slot side carries one extra learned entry, the
/// end-of-frame pseudo-slot, at index `ontology.slots.size()`.
struct NameBank {
  std::vector<Var> intent_vectors;
  std::vector<Var> slot_vectors;  ///< N_s names followed by the EOS entry
  Var intent_matrix;              ///< [N_i x H]
  Var slot_matrix;                ///< [(N_s + 1) x H]
  std::vector<Var> intent_inputs; ///< mean word embedding of each intent
  std::vector<Var> slot_inputs;   ///< mean word embedding of each slot name

  std::size_t eos_index() const { return slot_vectors.size() - 1; }
};

enum class StepKind { intent_choice, slot_name, value_word, stop };

struct IntentStep {
  Var delta;  ///< distribution over intents
  LstmState lstm;
};

struct SlotStep {
  Var gamma;      ///< over slots plus EOS
  Var attention;  ///< over source positions
  Var gate;       ///< p_slot, shape [1]
  Var context;
  LstmState lstm;
};

/// Plain values of one slot-side step. `joint` lists the slot entries
/// (including EOS) weighted by p_slot, then one entry per distinct source
/// word weighted by 1 - p_slot.
struct Ct2tStepDistribution {
  std::vector<Real> gamma;
  std::vector<Real> attention;
  Real gate = 0;
  std::vector<Real> joint;
};

struct Ct2tDecodeResult {
  Frame frame;
  bool truncated = false;
  std::vector<StepKind> steps;
};

struct Ct2tTrace {
  std::vector<StepKind> kinds;
};

/// Ontology-constrained decoder: one intent choice, then alternating slot
/// names (one step each) and copied value words, ended by the EOS slot.
class Ct2tDecoder {
 public:
  Ct2tDecoder(const Network& net, const Vocab& vocab);

  NameBank encode_ontology(const Encoder& encoder, const Ontology& ontology) const;

  DecoderState initial_state(const EncoderOutput& enc) const;
  IntentStep intent_step(const DecoderState& state, const NameBank& bank) const;
  SlotStep slot_step(const DecoderState& state, const EncoderOutput& enc, const NameBank& bank) const;
  Ct2tStepDistribution distribution(const SlotStep& step, const SourceView& source) const;

  /// Teacher-forced sum of -log P(gold choice) over the step plan.
  /// Throws DataError if a gold label is missing from the ontology or a
  /// gold value word does not occur in the source.
  Var loss(const Frame& gold, const Ontology& ontology, const EncoderOutput& enc, const SourceView& source,
           const NameBank& bank, Ct2tTrace* trace = nullptr) const;

  Ct2tDecodeResult decode_greedy(const EncoderOutput& enc, const SourceView& source, const NameBank& bank,
                                 const Ontology& ontology, std::size_t max_len) const;

  /// Replaces p_slot by a constant (diagnostics and tests).
  void force_gate(std::optional<Real> value) { forced_gate_ = value; }

 private:
  const Network* net_;
  const Vocab* vocab_;
  std::optional<Real> forced_gate_;
};

}  // namespace t2t
