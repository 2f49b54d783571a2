#include <doctest.h>

#include <cmath>
#include <random>

#include "t2t/encoder.hpp"
#include "t2t/error.hpp"
#include "test_util.hpp"

using namespace t2t;

namespace {

struct Fixture {
  TrainConfig config;
  Vocab vocab;
  ParamStore params;

  explicit Fixture(bool bidirectional = false, std::uint64_t seed = 3) {
    config.embed_dim = 5;
    config.hidden_dim = 4;
    config.bidirectional = bidirectional;
    config.init_scale = 0.8;
    for (const auto& w : split_words("set an alarm for six am date time")) vocab.add(w);
    params = init_params(config, vocab.size(), seed);
  }
};

Real sig(Real x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Plain-array LSTM over embedding rows, independent of the tape.
std::vector<std::vector<Real>> oracle_states(const ParamStore& p, const std::string& prefix,
                                             const std::vector<int>& ids, std::size_t e, std::size_t h) {
  const Tensor& emb = p.at("embedding");
  const Tensor& w = p.at(prefix + ".weight");
  const Tensor& b = p.at(prefix + ".bias");
  std::vector<Real> hs(h, 0.0), cs(h, 0.0);
  std::vector<std::vector<Real>> out;
  for (int id : ids) {
    std::vector<Real> xh;
    for (std::size_t k = 0; k < e; ++k) xh.push_back(emb.at(static_cast<std::size_t>(id), k));
    xh.insert(xh.end(), hs.begin(), hs.end());
    std::vector<Real> z(4 * h);
    for (std::size_t r = 0; r < 4 * h; ++r) {
      z[r] = b[r];
      for (std::size_t k = 0; k < e + h; ++k) z[r] += w.at(r, k) * xh[k];
    }
    for (std::size_t j = 0; j < h; ++j) {
      cs[j] = sig(z[h + j]) * cs[j] + sig(z[j]) * std::tanh(z[2 * h + j]);
      hs[j] = sig(z[3 * h + j]) * std::tanh(cs[j]);
    }
    out.push_back(hs);
  }
  return out;
}

std::vector<Real> values(const Tape& t, Var v) {
  auto s = t.value(v);
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("one state per token, matching a plain LSTM") {
  Fixture f;
  Tape t(false);
  Network net(t, f.params, f.config);
  const Encoder enc(net);
  const Words tokens = split_words("set an alarm for six am");
  const EncoderOutput out = enc.encode_utterance(tokens, f.vocab);
  REQUIRE(out.states.size() == tokens.size());
  CHECK(t.shape(out.memory) == Shape{tokens.size(), 4});

  const auto oracle = oracle_states(f.params, "encoder.lstm", f.vocab.encode(tokens), 5, 4);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto got = values(t, out.states[i]);
    for (std::size_t d = 0; d < 4; ++d) {
      CHECK(got[d] == doctest::Approx(oracle[i][d]).epsilon(1e-12));
      CHECK(t.value(out.memory)[i * 4 + d] == got[d]);
    }
  }
  CHECK(values(t, out.final.h) == values(t, out.states.back()));
}

TEST_CASE("bidirectional states sum both directions") {
  Fixture f(true);
  Tape t(false);
  Network net(t, f.params, f.config);
  const Words tokens = split_words("alarm for six");
  const EncoderOutput out = Encoder(net).encode_utterance(tokens, f.vocab);
  const auto ids = f.vocab.encode(tokens);
  const auto fwd = oracle_states(f.params, "encoder.lstm", ids, 5, 4);
  const auto bwd = oracle_states(f.params, "encoder.lstm_reverse", {ids.rbegin(), ids.rend()}, 5, 4);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t d = 0; d < 4; ++d) {
      CHECK(t.value(out.states[i])[d] == doctest::Approx(fwd[i][d] + bwd[tokens.size() - 1 - i][d]).epsilon(1e-12));
    }
  }
}

TEST_CASE("unknown words use the <unk> row and stay finite") {
  Fixture f;
  Tape t(false);
  Network net(t, f.params, f.config);
  const Encoder enc(net);
  const EncoderOutput a = enc.encode_utterance(split_words("alarm zzyzx"), f.vocab);
  const EncoderOutput b = enc.encode_utterance({"alarm", kUnkToken}, f.vocab);
  for (auto x : t.value(a.states[1])) CHECK(std::isfinite(x));
  CHECK(values(t, a.states[1]) == values(t, b.states[1]));
}

TEST_CASE("encoding is deterministic and rejects empty input") {
  Fixture f;
  Tape t(false);
  Network net(t, f.params, f.config);
  const Encoder enc(net);
  const Words tokens = split_words("set an alarm");
  const EncoderOutput a = enc.encode_utterance(tokens, f.vocab);
  const EncoderOutput b = enc.encode_utterance(tokens, f.vocab);
  for (std::size_t i = 0; i < tokens.size(); ++i) CHECK(values(t, a.states[i]) == values(t, b.states[i]));
  CHECK_THROWS_AS(enc.encode_utterance({}, f.vocab), DataError);
  CHECK_THROWS_AS(enc.encode_name(Words{}, f.vocab), DataError);
}

TEST_CASE("name vectors max-pool the encoder states") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Fixture f(false, seed);
    Tape t(false);
    Network net(t, f.params, f.config);
    const Encoder enc(net);

    const Words name = split_words("date time alarm");
    const Var pooled = enc.encode_name(name, f.vocab);
    const auto states = oracle_states(f.params, "encoder.lstm", f.vocab.encode(name), 5, 4);
    for (std::size_t d = 0; d < 4; ++d) {
      Real best = states[0][d];
      for (const auto& s : states) best = std::max(best, s[d]);
      CHECK(t.value(pooled)[d] == doctest::Approx(best).epsilon(1e-12));
    }

    // A single word pools to its own state.
    const Var single = enc.encode_name(Words{"alarm"}, f.vocab);
    const EncoderOutput direct = enc.encode_utterance({"alarm"}, f.vocab);
    CHECK(values(t, single) == values(t, direct.states[0]));
    // Length-agnostic dimension.
    CHECK(t.shape(single) == t.shape(pooled));
  }
}

TEST_CASE("max pooling commutes with a permutation of dimensions") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<Real> u(-1, 1);
  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  Tape t(false);
  std::vector<Var> states, permuted;
  for (int s = 0; s < 3; ++s) {
    std::vector<Real> v(4);
    for (auto& x : v) x = u(rng);
    std::vector<Real> pv(4);
    for (std::size_t d = 0; d < 4; ++d) pv[d] = v[perm[d]];
    states.push_back(t.constant(Tensor::vector(v)));
    permuted.push_back(t.constant(Tensor::vector(pv)));
  }
  const auto a = values(t, max_pool_over_time(states));
  const auto b = values(t, max_pool_over_time(permuted));
  for (std::size_t d = 0; d < 4; ++d) CHECK(b[d] == a[perm[d]]);
}

TEST_CASE("source view groups repeated words and skips separators") {
  Fixture f;
  const SourceView v = SourceView::make(split_words("six am or six pm [T] x"), f.vocab);
  CHECK(v.distinct == split_words("six am or pm x"));
  CHECK(v.group == std::vector<int>{0, 1, 2, 0, 3, -1, 4});
  CHECK(v.positions("six") == std::vector<std::size_t>{0, 3});
  CHECK(v.positions("[T]").empty());
  CHECK(v.ids[4] == Vocab::kUnk);  // "pm" is not in the vocabulary
  CHECK(v.ids[0] == f.vocab.id("six"));

  const SourceView hidden = SourceView::make(split_words("six am"), f.vocab, {"six"});
  CHECK(hidden.ids == std::vector<int>{Vocab::kUnk, f.vocab.id("am")});
  CHECK(hidden.id_of("six", f.vocab) == Vocab::kUnk);
  CHECK(hidden.id_of("alarm", f.vocab) == f.vocab.id("alarm"));
}

TEST_CASE("initial parameters follow the documented scheme") {
  Fixture f;
  const Tensor& bias = f.params.at("encoder.lstm.bias");
  for (std::size_t i = 0; i < bias.size(); ++i) CHECK(bias[i] == (i >= 4 && i < 8 ? 1.0 : 0.0));
  for (auto x : f.params.at("embedding").data()) CHECK(std::abs(x) <= 0.8);
  CHECK(f.params.at("decoder.lstm.weight").shape() == Shape{16, 9});

  Fixture again;
  CHECK(again.params == f.params);
  TrainConfig feeding = f.config;
  feeding.input_feeding = true;
  CHECK(init_params(feeding, f.vocab.size(), 1).at("decoder.lstm.weight").shape() == Shape{16, 13});
}
