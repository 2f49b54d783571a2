#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace t2t {

using Words = std::vector<std::string>;

Words split_words(std::string_view text);
std::string join_words(const Words& words);

/// Canonical form of an intent or slot label: CamelCase boundaries and the
/// separators '_', '/', '.' become spaces, lowercased, whitespace collapsed.
/// "object_name" -> "object name", "SearchCreativeWork" -> "search creative work".
Words normalize_label(std::string_view label);

/// One supervised utterance.
struct TaggedExample {
  Words tokens;
  std::vector<std::string> tags;  ///< "O", "B-<slot>", "I-<slot>"
  Words intent;
  std::string domain;

  bool operator==(const TaggedExample&) const = default;
};

using Dataset = std::vector<TaggedExample>;

struct SlotPair {
  Words name;
  Words value;

  bool operator==(const SlotPair&) const = default;
};

/// Intent plus slot pairs in order of their occurrence in the utterance.
struct Frame {
  Words intent;
  std::vector<SlotPair> slots;

  bool operator==(const Frame&) const = default;
};

/// A slot value located in the source: tokens [begin, end).
struct SlotSpan {
  Words name;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const SlotSpan&) const = default;
};

/// Domain-specific label inventory, each label a word sequence.
struct Ontology {
  std::vector<Words> intents;
  std::vector<Words> slots;

  /// Throws DataError on an empty or duplicate name.
  void validate() const;
  std::optional<std::size_t> intent_index(const Words& name) const;
  std::optional<std::size_t> slot_index(const Words& name) const;
  bool operator==(const Ontology&) const = default;
};

enum class BioPolicy {
  repair,  ///< orphan "I-x" becomes "B-x"
  strict,  ///< orphan "I-x" is a DataError
};

struct LoadOptions {
  BioPolicy bio = BioPolicy::repair;
  std::ostream* log = nullptr;  ///< receives one line per repair
};

/// Reads line-delimited JSON records {tokens, tags, intent, domain?}.
/// Blank lines are skipped. Errors carry the 1-based line number.
Dataset load_dataset(const std::string& path, const LoadOptions& options = {});
Dataset read_dataset(std::istream& in, const LoadOptions& options = {}, const std::string& source = "<stream>");
void save_dataset(const Dataset& data, const std::string& path);
void write_dataset(const Dataset& data, std::ostream& out);

/// Checks lengths and BIO well-formedness. Returns the number of orphan
/// I-tags repaired (always 0 under the strict policy, which throws instead).
std::size_t validate_example(TaggedExample& example, BioPolicy policy, std::ostream* log = nullptr,
                             const std::string& where = "");

/// One span per maximal B/I run, in token order.
std::vector<SlotSpan> extract_slot_spans(const Words& tokens, const std::vector<std::string>& tags);
std::vector<SlotPair> extract_slot_pairs(const Words& tokens, const std::vector<std::string>& tags);
/// Inverse of extract_slot_spans: BIO tags over `length` tokens with
/// normalized slot names.
std::vector<std::string> spans_to_tags(std::size_t length, const std::vector<SlotSpan>& spans);
/// Places frame values onto the tokens left to right, in pair order.
/// Returns std::nullopt when some value cannot be placed.
std::optional<std::vector<std::string>> project_frame(const Words& tokens, const Frame& frame);
/// Tags rewritten with normalized slot names ("B-object_name" -> "B-object name").
std::vector<std::string> normalize_tags(const std::vector<std::string>& tags);

Frame build_target_frame(const TaggedExample& example);

/// Sorted, deduplicated intent and slot names. Throws on an empty dataset.
Ontology extract_ontology(const Dataset& data);
Ontology merge_ontologies(const Ontology& a, const Ontology& b);

void save_ontology(const Ontology& ontology, const std::string& path);
Ontology load_ontology(const std::string& path);

/// Stratified-by-intent sample: ceil(fraction * |stratum|) per intent,
/// chosen with a seeded shuffle, source order preserved.
Dataset subsample(const Dataset& data, double fraction, std::uint64_t seed);

Dataset filter_domains(const Dataset& data, const std::vector<std::string>& domains);

}  // namespace t2t
