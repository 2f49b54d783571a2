#include "t2t/encoder.hpp"

#include <algorithm>

#include "t2t/error.hpp"
#include "t2t/frames.hpp"

namespace t2t {

namespace {

Tensor uniform(Shape shape, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

void add_lstm(ParamStore& p, const std::string& prefix, std::size_t input, std::size_t hidden, double scale,
              std::mt19937_64& rng) {
  p.add(prefix + ".weight", uniform({4 * hidden, input + hidden}, scale, rng));
  Tensor bias({4 * hidden}, 0.0);
  for (std::size_t i = hidden; i < 2 * hidden; ++i) bias[i] = 1.0;
  p.add(prefix + ".bias", std::move(bias));
}

}  // namespace

ParamStore init_params(const TrainConfig& config, std::size_t vocab_size, std::uint64_t seed) {
  const std::size_t e = config.embed_dim, h = config.hidden_dim;
  const double s = config.init_scale;
  std::mt19937_64 rng(seed);
  ParamStore p;
  p.add("embedding", uniform({vocab_size, e}, s, rng));
  add_lstm(p, "encoder.lstm", e, h, s, rng);
  if (config.bidirectional) add_lstm(p, "encoder.lstm_reverse", e, h, s, rng);
  p.add("decoder.start", uniform({e}, s, rng));
  add_lstm(p, "decoder.lstm", config.input_feeding ? e + h : e, h, s, rng);
  if (config.decoder == DecoderKind::ut2t) {
    p.add("ut2t.W_y", uniform({h, h}, s, rng));
    p.add("ut2t.W_a", uniform({h, 2 * h}, s, rng));
    p.add("ut2t.b_a", Tensor({h}, 0.0));
    p.add("ut2t.W_out", uniform({vocab_size, h}, s, rng));
    p.add("ut2t.b_out", Tensor({vocab_size}, 0.0));
    p.add("ut2t.w_a", uniform({h}, s, rng));
    p.add("ut2t.w_s", uniform({h}, s, rng));
    p.add("ut2t.w_e", uniform({e}, s, rng));
    p.add("ut2t.b_gen", Tensor({1}, 0.0));
  } else {
    p.add("ct2t.W_i", uniform({h, h}, s, rng));
    p.add("ct2t.W_s", uniform({h, h}, s, rng));
    p.add("ct2t.W_h", uniform({h, h}, s, rng));
    p.add("ct2t.W_a", uniform({h, 2 * h}, s, rng));
    p.add("ct2t.b_a", Tensor({h}, 0.0));
    p.add("ct2t.w_a", uniform({h}, s, rng));
    p.add("ct2t.w_s", uniform({h}, s, rng));
    p.add("ct2t.w_e", uniform({e}, s, rng));
    p.add("ct2t.b_slot", Tensor({1}, 0.0));
    p.add("ct2t.eos_slot", uniform({h}, s, rng));
  }
  p.round_to_storage();
  return p;
}

Network::Network(Tape& tape, const ParamStore& params, const TrainConfig& config, Noise noise)
    : tape_(&tape), params_(&params), config_(&config), noise_(noise) {}

Var Network::regularize(Var x) const {
  if (!noise_.active()) return x;
  return dropout(x, noise_.dropout, *noise_.rng);
}

LstmCell Network::cell(const std::string& prefix) const {
  return {param(prefix + ".weight"), param(prefix + ".bias"), config_->hidden_dim};
}

std::vector<Var> Encoder::run(std::span<const int> ids, LstmState* final) const {
  if (ids.empty()) throw DataError("cannot encode an empty token sequence");
  const Network& net = *net_;
  Tape& t = net.tape();
  const std::size_t h = net.config().hidden_dim;
  std::vector<Var> inputs;
  inputs.reserve(ids.size());
  for (int id : ids) inputs.push_back(net.regularize(net.embed(id)));

  const Var zero = t.constant(Tensor({h}, 0.0));
  LstmState state{zero, zero};
  const LstmCell fwd = net.cell("encoder.lstm");
  std::vector<Var> states;
  states.reserve(ids.size());
  for (const Var& x : inputs) {
    state = lstm_step(fwd, x, state);
    states.push_back(state.h);
  }
  if (final) *final = state;
  if (net.config().bidirectional) {
    const LstmCell bwd = net.cell("encoder.lstm_reverse");
    LstmState back{zero, zero};
    for (std::size_t i = inputs.size(); i-- > 0;) {
      back = lstm_step(bwd, inputs[i], back);
      states[i] = add(states[i], back.h);
    }
  }
  return states;
}

EncoderOutput Encoder::encode(std::span<const int> ids) const {
  EncoderOutput out;
  out.states = run(ids, &out.final);
  out.memory = stack_rows(out.states);
  return out;
}

EncoderOutput Encoder::encode_utterance(const Words& tokens, const Vocab& vocab) const {
  const std::vector<int> ids = vocab.encode(tokens);
  return encode(ids);
}

Var Encoder::encode_name(std::span<const int> ids) const {
  if (ids.empty()) throw DataError("cannot encode an empty name");
  const std::vector<Var> states = run(ids, nullptr);
  return max_pool_over_time(states);
}

Var Encoder::encode_name(const Words& words, const Vocab& vocab) const {
  const std::vector<int> ids = vocab.encode(words);
  return encode_name(ids);
}

SourceView SourceView::make(const Words& tokens, const Vocab& vocab, std::set<std::string> hidden) {
  SourceView v;
  v.tokens = tokens;
  v.hidden = std::move(hidden);
  for (const auto& w : tokens) v.ids.push_back(v.id_of(w, vocab));
  v.group.assign(tokens.size(), -1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& w = tokens[i];
    if (w == kPairToken || w == kValueToken) continue;
    auto it = std::find(v.distinct.begin(), v.distinct.end(), w);
    if (it == v.distinct.end()) {
      v.group[i] = static_cast<int>(v.distinct.size());
      v.distinct.push_back(w);
    } else {
      v.group[i] = static_cast<int>(it - v.distinct.begin());
    }
  }
  return v;
}

int SourceView::id_of(const std::string& word, const Vocab& vocab) const {
  return hidden.contains(word) ? Vocab::kUnk : vocab.id(word);
}

std::vector<std::size_t> SourceView::positions(const std::string& word) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (group[i] >= 0 && tokens[i] == word) out.push_back(i);
  }
  return out;
}

}  // namespace t2t
