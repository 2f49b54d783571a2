#include "t2t/vocab.hpp"

#include <set>

#include "t2t/error.hpp"
#include "t2t/frames.hpp"

namespace t2t {

Vocab::Vocab() {
  for (const auto* t : {&kPadToken, &kUnkToken, &kEosToken, &kPairToken, &kValueToken}) add(*t);
}

Vocab::Vocab(const std::vector<std::string>& tokens) : Vocab() {
  if (tokens.size() < kReserved) throw DataError("vocabulary is missing reserved tokens");
  for (int i = 0; i < kReserved; ++i) {
    if (tokens[static_cast<std::size_t>(i)] != tokens_[static_cast<std::size_t>(i)]) {
      throw DataError("vocabulary reserved token mismatch at id " + std::to_string(i));
    }
  }
  for (std::size_t i = kReserved; i < tokens.size(); ++i) {
    if (contains(tokens[i])) throw DataError("duplicate vocabulary token: " + tokens[i]);
    add(tokens[i]);
  }
}

int Vocab::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(const Words& words) const {
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

Vocab build_vocab(const Dataset& data, const std::vector<Words>& extra) {
  std::set<std::string> words;
  for (const auto& ex : data) {
    words.insert(ex.tokens.begin(), ex.tokens.end());
    for (const auto& w : serialize_frame(build_target_frame(ex))) words.insert(w);
  }
  for (const auto& e : extra) words.insert(e.begin(), e.end());
  Vocab v;
  for (const auto& w : words) v.add(w);
  return v;
}

}  // namespace t2t
