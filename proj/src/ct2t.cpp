#include "t2t/ct2t.hpp"

#include "t2t/error.hpp"

namespace t2t {

Ct2tDecoder::Ct2tDecoder(const Network& net, const Vocab& vocab) : net_(&net), vocab_(&vocab) {
  if (net.config().decoder != DecoderKind::ct2t) throw ConfigError("network is not configured for ct2t");
}

NameBank Ct2tDecoder::encode_ontology(const Encoder& encoder, const Ontology& ontology) const {
  if (ontology.intents.empty()) throw DataError("ontology has no intents");
  ontology.validate();
  const Network& net = *net_;
  NameBank bank;
  auto mean_embedding = [&](const Words& name) {
    std::vector<Var> parts;
    for (int id : vocab_->encode(name)) parts.push_back(net.embed(id));
    return mean(parts);
  };
  for (const auto& name : ontology.intents) {
    bank.intent_vectors.push_back(encoder.encode_name(name, *vocab_));
    bank.intent_inputs.push_back(mean_embedding(name));
  }
  for (const auto& name : ontology.slots) {
    bank.slot_vectors.push_back(encoder.encode_name(name, *vocab_));
    bank.slot_inputs.push_back(mean_embedding(name));
  }
  bank.slot_vectors.push_back(net.param("ct2t.eos_slot"));
  bank.intent_matrix = stack_rows(bank.intent_vectors);
  bank.slot_matrix = stack_rows(bank.slot_vectors);
  return bank;
}

DecoderState Ct2tDecoder::initial_state(const EncoderOutput& enc) const {
  return initial_decoder_state(*net_, enc);
}

IntentStep Ct2tDecoder::intent_step(const DecoderState& state, const NameBank& bank) const {
  const Network& net = *net_;
  const LstmState next = decoder_lstm(net, state);
  // delta_i = softmax(s_1 W_i vec_i)
  const Var delta = softmax(matvec(bank.intent_matrix, matvec_t(net.param("ct2t.W_i"), next.h)));
  return {delta, next};
}

SlotStep Ct2tDecoder::slot_step(const DecoderState& state, const EncoderOutput& enc, const NameBank& bank) const {
  const Network& net = *net_;
  const LstmState next = decoder_lstm(net, state);
  const Var s = next.h;
  const Var gamma = softmax(matvec(bank.slot_matrix, matvec_t(net.param("ct2t.W_s"), s)));
  const Var attention = softmax(matvec(enc.memory, matvec_t(net.param("ct2t.W_h"), s)));
  const Var context = matvec_t(enc.memory, attention);
  const Var m = tanh(add(matvec(net.param("ct2t.W_a"), concat({context, s})), net.param("ct2t.b_a")));

  Var gate;
  if (forced_gate_) {
    gate = net.tape().constant(Tensor::scalar(*forced_gate_));
  } else {
    Var logit = add(dot(net.param("ct2t.w_a"), m), dot(net.param("ct2t.w_s"), s));
    logit = add(logit, dot(net.param("ct2t.w_e"), state.prev_embedding));
    gate = sigmoid(add(logit, net.param("ct2t.b_slot")));
  }
  return {gamma, attention, gate, context, next};
}

Ct2tStepDistribution Ct2tDecoder::distribution(const SlotStep& step, const SourceView& source) const {
  const Tape& t = net_->tape();
  Ct2tStepDistribution d;
  auto gamma = t.value(step.gamma);
  auto att = t.value(step.attention);
  d.gamma.assign(gamma.begin(), gamma.end());
  d.attention.assign(att.begin(), att.end());
  d.gate = t.scalar(step.gate);
  d.joint.assign(gamma.size() + source.distinct.size(), 0.0);
  for (std::size_t k = 0; k < gamma.size(); ++k) d.joint[k] = d.gate * gamma[k];
  for (std::size_t i = 0; i < att.size(); ++i) {
    if (source.group[i] < 0) continue;
    d.joint[gamma.size() + static_cast<std::size_t>(source.group[i])] += (1.0 - d.gate) * att[i];
  }
  return d;
}

Var Ct2tDecoder::loss(const Frame& gold, const Ontology& ontology, const EncoderOutput& enc,
                      const SourceView& source, const NameBank& bank, Ct2tTrace* trace) const {
  const auto intent = ontology.intent_index(gold.intent);
  if (!intent) throw DataError("gold intent '" + join_words(gold.intent) + "' is not in the ontology");

  DecoderState state = initial_state(enc);
  const IntentStep first = intent_step(state, bank);
  Var total = cross_entropy_from_probs(first.delta, *intent);
  if (trace) trace->kinds.push_back(StepKind::intent_choice);
  state = {first.lstm, bank.intent_inputs[*intent], state.prev_context};

  for (const auto& pair : gold.slots) {
    const auto slot = ontology.slot_index(pair.name);
    if (!slot) throw DataError("gold slot '" + join_words(pair.name) + "' is not in the ontology");
    const SlotStep name_step = slot_step(state, enc, bank);
    total = add(total, cross_entropy_from_probs(mul(name_step.gate, pick(name_step.gamma, *slot)), 0));
    if (trace) trace->kinds.push_back(StepKind::slot_name);
    state = {name_step.lstm, bank.slot_inputs[*slot], name_step.context};

    for (const auto& word : pair.value) {
      const std::vector<std::size_t> pos = source.positions(word);
      if (pos.empty()) throw DataError("gold value word '" + word + "' does not occur in the utterance");
      const SlotStep value_step = slot_step(state, enc, bank);
      total = add(total,
                  cross_entropy_from_probs(mul(one_minus(value_step.gate), sum_at(value_step.attention, pos)), 0));
      if (trace) trace->kinds.push_back(StepKind::value_word);
      state = {value_step.lstm, net_->embed(source.id_of(word, *vocab_)), value_step.context};
    }
  }

  const SlotStep stop = slot_step(state, enc, bank);
  total = add(total, cross_entropy_from_probs(mul(stop.gate, pick(stop.gamma, bank.eos_index())), 0));
  if (trace) trace->kinds.push_back(StepKind::stop);
  return total;
}

Ct2tDecodeResult Ct2tDecoder::decode_greedy(const EncoderOutput& enc, const SourceView& source,
                                            const NameBank& bank, const Ontology& ontology,
                                            std::size_t max_len) const {
  Ct2tDecodeResult out;
  const Tape& t = net_->tape();
  DecoderState state = initial_state(enc);

  const IntentStep first = intent_step(state, bank);
  auto delta = t.value(first.delta);
  std::size_t intent = 0;
  for (std::size_t i = 1; i < delta.size(); ++i) {
    if (delta[i] > delta[intent]) intent = i;
  }
  out.frame.intent = ontology.intents[intent];
  out.steps.push_back(StepKind::intent_choice);
  state = {first.lstm, bank.intent_inputs[intent], state.prev_context};

  const std::size_t slot_entries = bank.slot_vectors.size();
  bool awaiting_value = false;
  while (out.steps.size() < max_len) {
    const SlotStep st = slot_step(state, enc, bank);
    const Ct2tStepDistribution d = distribution(st, source);

    // A value needs an open pair; an open pair needs at least one value word.
    const bool names_allowed = !awaiting_value;
    const bool values_allowed = !out.frame.slots.empty();
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < d.joint.size(); ++k) {
      const bool is_name = k < slot_entries;
      if ((is_name && !names_allowed) || (!is_name && !values_allowed)) continue;
      if (!best || d.joint[k] > d.joint[*best]) best = k;
    }
    if (!best) break;

    if (*best == bank.eos_index()) {
      out.steps.push_back(StepKind::stop);
      return out;
    }
    if (*best < slot_entries) {
      out.frame.slots.push_back({ontology.slots[*best], {}});
      out.steps.push_back(StepKind::slot_name);
      awaiting_value = true;
      state = {st.lstm, bank.slot_inputs[*best], st.context};
    } else {
      const std::string& word = source.distinct[*best - slot_entries];
      out.frame.slots.back().value.push_back(word);
      out.steps.push_back(StepKind::value_word);
      awaiting_value = false;
      state = {st.lstm, net_->embed(vocab_->id(word)), st.context};
    }
  }
  out.truncated = true;
  if (!out.frame.slots.empty() && out.frame.slots.back().value.empty()) out.frame.slots.pop_back();
  return out;
}

}  // namespace t2t
