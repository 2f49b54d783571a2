#include "t2t/ut2t.hpp"

#include <algorithm>
#include <cmath>

#include "t2t/error.hpp"
#include "t2t/frames.hpp"

namespace t2t {

Ut2tDecoder::Ut2tDecoder(const Network& net, const Vocab& vocab) : net_(&net), vocab_(&vocab) {
  if (net.config().decoder != DecoderKind::ut2t) throw ConfigError("network is not configured for ut2t");
}

LstmState decoder_lstm(const Network& net, const DecoderState& state) {
  Var input = net.regularize(state.prev_embedding);
  if (net.config().input_feeding) input = concat({input, state.prev_context});
  return lstm_step(net.cell("decoder.lstm"), input, state.lstm);
}

DecoderState initial_decoder_state(const Network& net, const EncoderOutput& enc) {
  DecoderState state{enc.final, net.param("decoder.start"), {}};
  if (net.config().input_feeding) state.prev_context = net.tape().constant(Tensor({net.config().hidden_dim}, 0.0));
  return state;
}

Var Ut2tDecoder::embed_word(const std::string& word) const { return net_->embed(vocab_->id(word)); }

DecoderState Ut2tDecoder::initial_state(const EncoderOutput& enc) const {
  return initial_decoder_state(*net_, enc);
}

Ut2tStep Ut2tDecoder::step(const DecoderState& state, const EncoderOutput& enc) const {
  const Network& net = *net_;
  const LstmState next = decoder_lstm(net, state);
  const Var s = next.h;

  // alpha_i = softmax(s W_y h_i)
  const Var attention = softmax(matvec(enc.memory, matvec_t(net.param("ut2t.W_y"), s)));
  const Var context = matvec_t(enc.memory, attention);
  const Var m = tanh(add(matvec(net.param("ut2t.W_a"), concat({context, s})), net.param("ut2t.b_a")));
  const Var vocab_probs =
      softmax(add(matvec(net.param("ut2t.W_out"), net.regularize(m)), net.param("ut2t.b_out")));

  Var gate;
  if (forced_gate_) {
    gate = net.tape().constant(Tensor::scalar(*forced_gate_));
  } else {
    Var logit = add(dot(net.param("ut2t.w_a"), m), dot(net.param("ut2t.w_s"), s));
    logit = add(logit, dot(net.param("ut2t.w_e"), state.prev_embedding));
    gate = sigmoid(add(logit, net.param("ut2t.b_gen")));
  }
  return {attention, vocab_probs, gate, context, next};
}

StepDistribution Ut2tDecoder::distribution(const Ut2tStep& step, const SourceView& source) const {
  const Tape& t = net_->tape();
  StepDistribution d;
  auto att = t.value(step.attention);
  auto pv = t.value(step.vocab_probs);
  d.attention.assign(att.begin(), att.end());
  d.vocab_probs.assign(pv.begin(), pv.end());
  d.gate = t.scalar(step.gate);

  const std::size_t v = pv.size();
  std::vector<int> slot_of_group(source.distinct.size(), -1);
  for (std::size_t g = 0; g < source.distinct.size(); ++g) {
    const std::string& w = source.distinct[g];
    if (vocab_->contains(w)) {
      slot_of_group[g] = vocab_->id(w);
    } else {
      slot_of_group[g] = static_cast<int>(v + d.extra_words.size());
      d.extra_words.push_back(w);
    }
  }
  d.final.assign(v + d.extra_words.size(), 0.0);
  for (std::size_t i = 0; i < v; ++i) d.final[i] = d.gate * pv[i];
  for (std::size_t i = 0; i < att.size(); ++i) {
    if (source.group[i] < 0) continue;
    d.final[static_cast<std::size_t>(slot_of_group[static_cast<std::size_t>(source.group[i])])] +=
        (1.0 - d.gate) * att[i];
  }
  return d;
}

Var Ut2tDecoder::loss(const Words& target, const EncoderOutput& enc, const SourceView& source,
                      LossTrace* trace) const {
  if (target.empty()) throw DataError("empty target sequence");
  Tape& t = net_->tape();
  DecoderState state = initial_state(enc);
  Var total = t.constant(Tensor::scalar(0.0));
  for (std::size_t k = 0; k < target.size(); ++k) {
    const std::string& word = target[k];
    const Ut2tStep st = step(state, enc);
    Var prob;
    bool any = false;
    const int id = source.id_of(word, *vocab_);
    if (id != Vocab::kUnk) {
      prob = mul(st.gate, pick(st.vocab_probs, static_cast<std::size_t>(id)));
      any = true;
    }
    const std::vector<std::size_t> pos = source.positions(word);
    if (!pos.empty()) {
      const Var copy = mul(one_minus(st.gate), sum_at(st.attention, pos));
      prob = any ? add(prob, copy) : copy;
      any = true;
    }
    Var term;
    if (any) {
      term = cross_entropy_from_probs(prob, 0);
      if (!(t.scalar(prob) > 1e-12) && trace) ++trace->clamped;
    } else {
      term = t.constant(Tensor::scalar(-std::log(1e-12)));
      if (trace) ++trace->clamped;
    }
    total = add(total, term);
    if (k + 1 < target.size()) {
      if (trace) trace->inputs.push_back(word);
      state = {st.lstm, net_->embed(id), st.context};
    }
  }
  return total;
}

Ut2tDecodeResult Ut2tDecoder::decode_greedy(const EncoderOutput& enc, const SourceView& source,
                                            std::size_t max_len) const {
  Ut2tDecodeResult out;
  DecoderState state = initial_state(enc);
  for (std::size_t k = 0; k < max_len; ++k) {
    const Ut2tStep st = step(state, enc);
    const StepDistribution d = distribution(st, source);
    // max_element keeps the first maximum, so ties go to the lowest id.
    const auto best = static_cast<std::size_t>(std::max_element(d.final.begin(), d.final.end()) - d.final.begin());
    const std::string word = best < d.vocab_probs.size() ? vocab_->token(static_cast<int>(best))
                                                         : d.extra_words[best - d.vocab_probs.size()];
    out.tokens.push_back(word);
    if (word == kEosToken) return out;
    state = {st.lstm, embed_word(word), st.context};
  }
  out.truncated = true;
  return out;
}

}  // namespace t2t
