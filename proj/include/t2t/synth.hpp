#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2t/corpus.hpp"

namespace t2t {

/// Templates use "{slot name}" placeholders, e.g. "cancel my alarm for {date time}".
struct IntentTemplates {
  Words intent;
  std::vector<std::string> templates;
};

struct DomainSpec {
  std::string name;
  std::vector<IntentTemplates> intents;
};

/// `oov_values` must share no word with `values` or with any template.
struct SlotLexicon {
  std::vector<Words> values;
  std::vector<Words> oov_values;
};

struct SynthSpec {
  std::vector<DomainSpec> domains;
  std::map<std::string, SlotLexicon> slots;  ///< keyed by joined slot name

  /// Throws DataError: fewer than two domains, an intent without templates,
  /// an unknown placeholder, or an empty lexicon.
  void validate() const;
  /// Copy restricted to the named domains, in the given order.
  SynthSpec select(const std::vector<std::string>& domains) const;
  /// Intents and slots reachable from the templates, sorted.
  Ontology ontology() const;
  std::vector<std::string> domain_names() const;
};

/// Alarm, weather and reminder domains. Alarm and reminder share their
/// verbs (cancel, set, show, snooze, modify); "date time" occurs in all
/// three.
SynthSpec default_synth_spec();

/// {"domains": [{"name", "intents": [{"name", "templates": [...]}]}],
///  "slots": {"<slot>": {"values": [...], "oov_values": [...]}}}
SynthSpec synth_spec_from_json(const nlohmann::json& doc);
SynthSpec load_synth_spec(const std::string& path);

enum class ValuePool {
  regular,  ///< in-lexicon values only
  oov,      ///< held-out values only
};

struct SynthCorpus {
  Dataset data;
  Ontology ontology;
};

/// `count` examples: domain, intent, template and values each drawn
/// uniformly. Deterministic for a fixed seed.
SynthCorpus synth_corpus(const SynthSpec& spec, std::size_t count, std::uint64_t seed,
                         ValuePool pool = ValuePool::regular);

}  // namespace t2t
