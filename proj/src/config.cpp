#include "t2t/config.hpp"

#include "t2t/error.hpp"

namespace t2t {

using json = nlohmann::json;

std::string to_string(DecoderKind kind) { return kind == DecoderKind::ut2t ? "ut2t" : "ct2t"; }

DecoderKind parse_decoder_kind(const std::string& text) {
  if (text == "ut2t" || text == "UT2T") return DecoderKind::ut2t;
  if (text == "ct2t" || text == "CT2T") return DecoderKind::ct2t;
  throw ConfigError("unknown decoder kind '" + text + "' (expected ut2t or ct2t)");
}

TrainConfig TrainConfig::asmixed_preset() {
  TrainConfig c;
  c.epochs = 50;
  c.dropout = 0.6;
  return c;
}

TrainConfig TrainConfig::mtod_preset() {
  TrainConfig c;
  c.epochs = 200;
  c.dropout = 0.5;
  return c;
}

void TrainConfig::validate(bool allow_zero_epochs) const {
  if (embed_dim == 0 || hidden_dim == 0) throw ConfigError("embed_dim and hidden_dim must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (!(word_dropout >= 0.0 && word_dropout < 1.0)) throw ConfigError("word_dropout must be in [0, 1)");
  if (epochs == 0 && !allow_zero_epochs) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("beta1 and beta2 must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (max_decode_len < 2) throw ConfigError("max_decode_len must be at least 2");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be non-negative");
  if (!(init_scale > 0.0)) throw ConfigError("init_scale must be positive");
}

json to_json(const TrainConfig& c) {
  return json{{"decoder", to_string(c.decoder)},
              {"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},
              {"bidirectional", c.bidirectional},
              {"input_feeding", c.input_feeding},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"epsilon", c.epsilon},
              {"dropout", c.dropout},
              {"word_dropout", c.word_dropout},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"max_decode_len", c.max_decode_len},
              {"clip_norm", c.clip_norm},
              {"init_scale", c.init_scale}};
}

TrainConfig config_from_json(const json& doc, TrainConfig c) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "decoder") c.decoder = parse_decoder_kind(value.get<std::string>());
      else if (key == "embed_dim") c.embed_dim = value.get<std::size_t>();
      else if (key == "hidden_dim") c.hidden_dim = value.get<std::size_t>();
      else if (key == "bidirectional") c.bidirectional = value.get<bool>();
      else if (key == "input_feeding") c.input_feeding = value.get<bool>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "word_dropout") c.word_dropout = value.get<double>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "max_decode_len") c.max_decode_len = value.get<std::size_t>();
      else if (key == "clip_norm") c.clip_norm = value.get<double>();
      else if (key == "init_scale") c.init_scale = value.get<double>();
      else throw ConfigError("unknown config key: " + key);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

}  // namespace t2t
