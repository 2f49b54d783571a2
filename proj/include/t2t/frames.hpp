#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "t2t/corpus.hpp"

namespace t2t {

inline const std::string kPadToken = "<pad>";
inline const std::string kUnkToken = "<unk>";
inline const std::string kEosToken = "<eos>";
inline const std::string kPairToken = "[T]";
inline const std::string kValueToken = "[:]";

/// Flattens a frame to
///   intent [T] name [:] value [T] name [:] value ... <eos>
Words serialize_frame(const Frame& frame);

struct ParseError {
  enum class Kind { empty_intent, malformed_pair };
  Kind kind = Kind::empty_intent;
  std::size_t segment = 0;  ///< index of the offending [T]-separated segment

  bool operator==(const ParseError&) const = default;
};

std::string to_string(const ParseError& error);

/// A parsed output sequence. On error, `frame.slots` is empty and
/// `frame.intent` holds whatever the first segment contained.
struct ParsedOutput {
  Frame frame;
  std::optional<ParseError> error;

  bool ok() const { return !error.has_value(); }
};

/// Reads model output back into a frame. Input is cut at the first <eos>
/// and <pad> tokens are dropped. Segments split on [T]; each pair segment
/// splits on its first [:]. Never throws.
ParsedOutput parse_output(const Words& tokens);

}  // namespace t2t
