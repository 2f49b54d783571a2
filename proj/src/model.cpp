#include "t2t/model.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "t2t/error.hpp"

namespace t2t {

using json = nlohmann::json;

Checkpoint make_model(const TrainConfig& config, Vocab vocab, Ontology ontology, std::uint64_t seed) {
  config.validate(true);
  Checkpoint ckpt{config, std::move(vocab), std::move(ontology), {}, {}};
  ckpt.params = init_params(config, ckpt.vocab.size(), seed);
  return ckpt;
}

namespace {

constexpr std::array<char, 4> kMagic{'C', 'T', '2', 'T'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

void put_f32(std::ostream& out, float f) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32(out, bits);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw DataError(std::string("truncated checkpoint while reading ") + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string get_bytes(std::istream& in, std::uint32_t n, const char* what) {
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw DataError(std::string("truncated checkpoint while reading ") + what);
  return s;
}

std::uint32_t checked_u32(std::size_t v) {
  if (v > 0xffffffffu) throw DataError("value too large for checkpoint field");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  json manifest;
  manifest["kind"] = to_string(ckpt.kind());
  manifest["config"] = to_json(ckpt.config);
  manifest["vocab"] = ckpt.vocab.tokens();
  json intents = json::array(), slots = json::array();
  for (const auto& n : ckpt.ontology.intents) intents.push_back(join_words(n));
  for (const auto& n : ckpt.ontology.slots) slots.push_back(join_words(n));
  manifest["ontology"] = {{"intents", intents}, {"slots", slots}};
  manifest["domains"] = ckpt.domains;
  const std::string text = manifest.dump();

  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, checked_u32(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_u32(out, checked_u32(ckpt.params.size()));
  for (const auto& entry : ckpt.params.entries()) {
    put_u32(out, checked_u32(entry.name.size()));
    out.write(entry.name.data(), static_cast<std::streamsize>(entry.name.size()));
    put_u32(out, checked_u32(entry.value.rank()));
    for (auto d : entry.value.shape()) put_u32(out, checked_u32(d));
    for (auto v : entry.value.data()) put_f32(out, static_cast<float>(v));
  }
  if (!out) throw DataError("failed to write checkpoint");
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint file: " + path);
  write_checkpoint(ckpt, out);
}

Checkpoint read_checkpoint(std::istream& in, std::optional<DecoderKind> expected) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("not a checkpoint file (bad magic)");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t manifest_len = get_u32(in, "manifest length");
  const std::string text = get_bytes(in, manifest_len, "manifest");

  Checkpoint ckpt;
  try {
    const json manifest = json::parse(text);
    ckpt.config = config_from_json(manifest.at("config"));
    if (parse_decoder_kind(manifest.at("kind").get<std::string>()) != ckpt.config.decoder) {
      throw DataError("checkpoint manifest kind disagrees with its config");
    }
    ckpt.vocab = Vocab(manifest.at("vocab").get<std::vector<std::string>>());
    for (const auto& s : manifest.at("ontology").at("intents")) {
      ckpt.ontology.intents.push_back(split_words(s.get<std::string>()));
    }
    for (const auto& s : manifest.at("ontology").at("slots")) {
      ckpt.ontology.slots.push_back(split_words(s.get<std::string>()));
    }
    if (manifest.contains("domains")) ckpt.domains = manifest.at("domains").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed checkpoint manifest: ") + e.what());
  }
  if (expected && *expected != ckpt.kind()) {
    throw ConfigError("checkpoint kind mismatch: expected " + to_string(*expected) + ", found " +
                      to_string(ckpt.kind()));
  }

  // The layout must match what this config and vocabulary produce.
  const ParamStore layout = init_params(ckpt.config, ckpt.vocab.size(), 0);
  const std::uint32_t count = get_u32(in, "tensor count");
  if (count != layout.size()) {
    throw DataError("checkpoint holds " + std::to_string(count) + " tensors, expected " +
                    std::to_string(layout.size()));
  }
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string name = get_bytes(in, get_u32(in, "tensor name length"), "tensor name");
    const std::uint32_t rank = get_u32(in, "tensor rank");
    if (rank == 0 || rank > 2) throw DataError("tensor " + name + " has unsupported rank " + std::to_string(rank));
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(get_u32(in, "tensor dims"));
    if (name != layout.name(k) || shape != layout.at(k).shape()) {
      throw DataError("tensor " + std::to_string(k) + " is " + name + shape_string(shape) + ", expected " +
                      layout.name(k) + shape_string(layout.at(k).shape()));
    }
    std::vector<Real> values(shape_size(shape));
    for (auto& v : values) {
      const std::uint32_t bits = get_u32(in, "tensor values");
      float f = 0;
      std::memcpy(&f, &bits, sizeof f);
      v = static_cast<Real>(f);
    }
    ckpt.params.add(name, Tensor(shape, std::move(values)));
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, std::optional<DecoderKind> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint file: " + path);
  return read_checkpoint(in, expected);
}

BatchGraph::BatchGraph(Tape& tape, const Checkpoint& model, Noise noise, double word_dropout)
    : model_(&model),
      net_(tape, model.params, model.config, noise),
      encoder_(net_),
      noise_(noise),
      word_dropout_(word_dropout) {
  if (model.kind() == DecoderKind::ct2t) {
    bank_ = Ct2tDecoder(net_, model.vocab).encode_ontology(encoder_, model.ontology);
  }
}

Var BatchGraph::loss(const TaggedExample& example) {
  const Vocab& vocab = model_->vocab;
  const Frame gold = build_target_frame(example);
  // Word dropout hides whole value-word types, so the source, the decoder
  // inputs and the vocabulary targets all see them as unknown at once.
  std::set<std::string> hidden;
  if (word_dropout_ > 0.0 && noise_.rng) {
    std::bernoulli_distribution coin(word_dropout_);
    for (const auto& pair : gold.slots) {
      for (const auto& w : pair.value) {
        if (!hidden.contains(w) && coin(*noise_.rng)) hidden.insert(w);
      }
    }
  }
  const SourceView source = SourceView::make(example.tokens, vocab, std::move(hidden));
  const EncoderOutput enc = encoder_.encode(source.ids);
  if (model_->kind() == DecoderKind::ut2t) {
    return Ut2tDecoder(net_, vocab).loss(serialize_frame(gold), enc, source);
  }
  return Ct2tDecoder(net_, vocab).loss(gold, model_->ontology, enc, source, *bank_);
}

Predictor::Predictor(const Checkpoint& model, std::optional<Ontology> ontology)
    : model_(&model), ontology_(ontology ? std::move(*ontology) : model.ontology) {
  tape_ = std::make_unique<Tape>(false);
  net_ = std::make_unique<Network>(*tape_, model.params, model.config);
  encoder_ = std::make_unique<Encoder>(*net_);
  if (model.kind() == DecoderKind::ct2t) {
    bank_ = Ct2tDecoder(*net_, model.vocab).encode_ontology(*encoder_, ontology_);
  }
  mark_ = tape_->mark();
}

Prediction Predictor::predict(const Words& tokens) {
  tape_->truncate(mark_);
  const Vocab& vocab = model_->vocab;
  const SourceView source = SourceView::make(tokens, vocab);
  const EncoderOutput enc = encoder_->encode(source.ids);
  const std::size_t max_len = model_->config.max_decode_len;
  Prediction p;
  if (model_->kind() == DecoderKind::ut2t) {
    const Ut2tDecodeResult r = Ut2tDecoder(*net_, vocab).decode_greedy(enc, source, max_len);
    p.output = r.tokens;
    p.truncated = r.truncated;
    ParsedOutput parsed = parse_output(r.tokens);
    p.frame = std::move(parsed.frame);
    p.parse_error = parsed.error;
  } else {
    Ct2tDecodeResult r = Ct2tDecoder(*net_, vocab).decode_greedy(enc, source, *bank_, ontology_, max_len);
    p.frame = std::move(r.frame);
    p.truncated = r.truncated;
    p.output = serialize_frame(p.frame);
  }
  return p;
}

}  // namespace t2t
