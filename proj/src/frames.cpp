#include "t2t/frames.hpp"

#include <algorithm>

namespace t2t {

Words serialize_frame(const Frame& frame) {
  Words out = frame.intent;
  for (const auto& pair : frame.slots) {
    out.push_back(kPairToken);
    out.insert(out.end(), pair.name.begin(), pair.name.end());
    out.push_back(kValueToken);
    out.insert(out.end(), pair.value.begin(), pair.value.end());
  }
  out.push_back(kEosToken);
  return out;
}

std::string to_string(const ParseError& error) {
  switch (error.kind) {
    case ParseError::Kind::empty_intent:
      return "EmptyIntent";
    case ParseError::Kind::malformed_pair:
      return "MalformedPair(" + std::to_string(error.segment) + ")";
  }
  return "ParseError";
}

ParsedOutput parse_output(const Words& tokens) {
  std::vector<Words> segments(1);
  for (const auto& tok : tokens) {
    if (tok == kEosToken) break;
    if (tok == kPadToken) continue;
    if (tok == kPairToken) {
      segments.emplace_back();
    } else {
      segments.back().push_back(tok);
    }
  }

  ParsedOutput out;
  out.frame.intent = segments.front();
  if (out.frame.intent.empty()) {
    out.error = ParseError{ParseError::Kind::empty_intent, 0};
    return out;
  }
  if (std::find(out.frame.intent.begin(), out.frame.intent.end(), kValueToken) != out.frame.intent.end()) {
    out.error = ParseError{ParseError::Kind::malformed_pair, 0};
    return out;
  }
  for (std::size_t s = 1; s < segments.size(); ++s) {
    const Words& seg = segments[s];
    auto colon = std::find(seg.begin(), seg.end(), kValueToken);
    SlotPair pair{Words(seg.begin(), colon), colon == seg.end() ? Words{} : Words(colon + 1, seg.end())};
    if (colon == seg.end() || pair.name.empty() || pair.value.empty()) {
      out.error = ParseError{ParseError::Kind::malformed_pair, s};
      out.frame.slots.clear();
      return out;
    }
    out.frame.slots.push_back(std::move(pair));
  }
  return out;
}

}  // namespace t2t
