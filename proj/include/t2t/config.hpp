#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace t2t {

enum class DecoderKind { ut2t, ct2t };

std::string to_string(DecoderKind kind);
DecoderKind parse_decoder_kind(const std::string& text);

/// Hyperparameters for model shape, optimisation and decoding.
struct TrainConfig {
  DecoderKind decoder = DecoderKind::ct2t;
  std::size_t embed_dim = 256;
  std::size_t hidden_dim = 256;
  bool bidirectional = false;
  /// Also feed the previous attention context to the decoder LSTM, next to
  /// the previous word's embedding.
  bool input_feeding = false;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  double dropout = 0.5;  ///< drop probability
  /// Probability, per slot-value word type of a training example, of
  /// treating that word as unknown (source, decoder input and target).
  double word_dropout = 0.0;
  std::size_t epochs = 200;
  std::uint64_t seed = 1;
  std::size_t max_decode_len = 60;
  double clip_norm = 0.0;  ///< global-norm clipping, 0 disables; 5.0 is the usual setting
  double init_scale = 0.1;

  /// 50 epochs, dropout 0.6.
  static TrainConfig asmixed_preset();
  /// 200 epochs, dropout 0.5.
  static TrainConfig mtod_preset();

  /// Throws ConfigError. `allow_zero_epochs` is for fine-tuning.
  void validate(bool allow_zero_epochs = false) const;

  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json to_json(const TrainConfig& config);
/// Fields missing from `doc` keep their value in `base`; unknown keys throw.
TrainConfig config_from_json(const nlohmann::json& doc, TrainConfig base = {});

}  // namespace t2t
