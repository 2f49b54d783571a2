#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "t2t/corpus.hpp"

namespace t2t {

/// Token <-> id bijection with fixed reserved ids.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kEos = 2;
  static constexpr int kPair = 3;   ///< [T]
  static constexpr int kValue = 4;  ///< [:]
  static constexpr int kReserved = 5;

  Vocab();
  /// Reserved tokens must come first, in id order.
  explicit Vocab(const std::vector<std::string>& tokens);

  /// Returns the id of `token`, adding it if absent.
  int add(const std::string& token);
  bool contains(const std::string& token) const { return ids_.count(token) != 0; }
  /// Id of `token`, or kUnk.
  int id(const std::string& token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(const Words& words) const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// Every source token and every token of the serialized target frames,
/// sorted, after the reserved block. `extra` words are added as well.
Vocab build_vocab(const Dataset& data, const std::vector<Words>& extra = {});

}  // namespace t2t
