#include "t2t/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "t2t/error.hpp"

namespace t2t {

using json = nlohmann::json;

Words split_words(std::string_view text) {
  Words out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_words(const Words& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

Words normalize_label(std::string_view label) {
  std::string spaced;
  spaced.reserve(label.size() + 8);
  for (std::size_t i = 0; i < label.size(); ++i) {
    const auto c = static_cast<unsigned char>(label[i]);
    if (c == '_' || c == '/' || c == '.') {
      spaced += ' ';
      continue;
    }
    if (std::isupper(c) && i > 0) {
      const auto prev = static_cast<unsigned char>(label[i - 1]);
      if (std::islower(prev) || std::isdigit(prev)) spaced += ' ';
    }
    spaced += static_cast<char>(std::tolower(c));
  }
  return split_words(spaced);
}

void Ontology::validate() const {
  auto check = [](const std::vector<Words>& names, const char* kind) {
    std::set<Words> seen;
    for (const auto& n : names) {
      if (n.empty()) throw DataError(std::string("empty ") + kind + " name in ontology");
      if (!seen.insert(n).second) {
        throw DataError(std::string("duplicate ") + kind + " name in ontology: " + join_words(n));
      }
    }
  };
  check(intents, "intent");
  check(slots, "slot");
}

std::optional<std::size_t> Ontology::intent_index(const Words& name) const {
  auto it = std::find(intents.begin(), intents.end(), name);
  if (it == intents.end()) return std::nullopt;
  return static_cast<std::size_t>(it - intents.begin());
}

std::optional<std::size_t> Ontology::slot_index(const Words& name) const {
  auto it = std::find(slots.begin(), slots.end(), name);
  if (it == slots.end()) return std::nullopt;
  return static_cast<std::size_t>(it - slots.begin());
}

namespace {

struct ParsedTag {
  char kind = 'O';  // 'O', 'B' or 'I'
  Words name;
};

ParsedTag parse_tag(const std::string& tag, const std::string& where) {
  if (tag == "O") return {};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    ParsedTag out{tag[0], normalize_label(std::string_view(tag).substr(2))};
    if (!out.name.empty()) return out;
  }
  throw DataError("malformed BIO tag '" + tag + "'" + where);
}

}  // namespace

std::size_t validate_example(TaggedExample& example, BioPolicy policy, std::ostream* log,
                             const std::string& where) {
  if (example.tokens.size() != example.tags.size()) {
    throw DataError("length mismatch" + where + ": " + std::to_string(example.tokens.size()) + " tokens, " +
                    std::to_string(example.tags.size()) + " tags");
  }
  if (example.tokens.empty()) throw DataError("empty utterance" + where);
  if (example.intent.empty()) throw DataError("empty intent" + where);
  std::size_t repaired = 0;
  ParsedTag prev;
  for (std::size_t i = 0; i < example.tags.size(); ++i) {
    ParsedTag cur = parse_tag(example.tags[i], where);
    if (cur.kind == 'I' && (prev.kind == 'O' || prev.name != cur.name)) {
      if (policy == BioPolicy::strict) {
        throw DataError("orphan tag '" + example.tags[i] + "' at token " + std::to_string(i) + where);
      }
      const std::string fixed = "B-" + example.tags[i].substr(2);
      if (log) *log << "repaired orphan tag '" << example.tags[i] << "' -> '" << fixed << "' at token " << i << where << '\n';
      example.tags[i] = fixed;
      cur.kind = 'B';
      ++repaired;
    }
    prev = std::move(cur);
  }
  return repaired;
}

Dataset read_dataset(std::istream& in, const LoadOptions& options, const std::string& source) {
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (split_words(line).empty()) continue;
    const std::string where = " at line " + std::to_string(line_no) + " of " + source;
    TaggedExample ex;
    try {
      const json rec = json::parse(line);
      ex.tokens = rec.at("tokens").get<Words>();
      ex.tags = rec.at("tags").get<std::vector<std::string>>();
      ex.intent = normalize_label(rec.at("intent").get<std::string>());
      if (rec.contains("domain") && !rec.at("domain").is_null()) ex.domain = rec.at("domain").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError("malformed record" + where + ": " + e.what());
    }
    validate_example(ex, options.bio, options.log, where);
    out.push_back(std::move(ex));
  }
  return out;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return read_dataset(in, options, path);
}

void write_dataset(const Dataset& data, std::ostream& out) {
  for (const auto& ex : data) {
    json rec;
    rec["tokens"] = ex.tokens;
    rec["tags"] = ex.tags;
    rec["intent"] = join_words(ex.intent);
    if (!ex.domain.empty()) rec["domain"] = ex.domain;
    out << rec.dump() << '\n';
  }
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path);
  write_dataset(data, out);
}

std::vector<SlotSpan> extract_slot_spans(const Words& tokens, const std::vector<std::string>& tags) {
  if (tokens.size() != tags.size()) throw DataError("length mismatch between tokens and tags");
  std::vector<SlotSpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const ParsedTag tag = parse_tag(tags[i], "");
    if (tag.kind == 'O') continue;
    const bool continues = tag.kind == 'I' && !spans.empty() && spans.back().end == i && spans.back().name == tag.name;
    if (continues) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({tag.name, i, i + 1});
    }
  }
  return spans;
}

std::vector<SlotPair> extract_slot_pairs(const Words& tokens, const std::vector<std::string>& tags) {
  std::vector<SlotPair> pairs;
  for (const auto& span : extract_slot_spans(tokens, tags)) {
    pairs.push_back({span.name, Words(tokens.begin() + static_cast<std::ptrdiff_t>(span.begin),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(span.end))});
  }
  return pairs;
}

std::vector<std::string> spans_to_tags(std::size_t length, const std::vector<SlotSpan>& spans) {
  std::vector<std::string> tags(length, "O");
  for (const auto& s : spans) {
    const std::string name = join_words(s.name);
    for (std::size_t i = s.begin; i < s.end && i < length; ++i) tags[i] = (i == s.begin ? "B-" : "I-") + name;
  }
  return tags;
}

std::optional<std::vector<std::string>> project_frame(const Words& tokens, const Frame& frame) {
  std::vector<SlotSpan> spans;
  std::size_t cursor = 0;
  for (const auto& pair : frame.slots) {
    if (pair.value.empty()) return std::nullopt;
    auto it = std::search(tokens.begin() + static_cast<std::ptrdiff_t>(cursor), tokens.end(), pair.value.begin(),
                          pair.value.end());
    if (it == tokens.end()) return std::nullopt;
    const auto begin = static_cast<std::size_t>(it - tokens.begin());
    spans.push_back({pair.name, begin, begin + pair.value.size()});
    cursor = begin + pair.value.size();
  }
  return spans_to_tags(tokens.size(), spans);
}

std::vector<std::string> normalize_tags(const std::vector<std::string>& tags) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const auto& t : tags) {
    const ParsedTag p = parse_tag(t, "");
    out.push_back(p.kind == 'O' ? "O" : std::string(1, p.kind) + "-" + join_words(p.name));
  }
  return out;
}

Frame build_target_frame(const TaggedExample& example) {
  return {example.intent, extract_slot_pairs(example.tokens, example.tags)};
}

Ontology extract_ontology(const Dataset& data) {
  if (data.empty()) throw DataError("cannot extract an ontology from an empty dataset");
  std::set<Words> intents, slots;
  for (const auto& ex : data) {
    intents.insert(ex.intent);
    for (const auto& span : extract_slot_spans(ex.tokens, ex.tags)) slots.insert(span.name);
  }
  return {{intents.begin(), intents.end()}, {slots.begin(), slots.end()}};
}

Ontology merge_ontologies(const Ontology& a, const Ontology& b) {
  std::set<Words> intents(a.intents.begin(), a.intents.end());
  intents.insert(b.intents.begin(), b.intents.end());
  std::set<Words> slots(a.slots.begin(), a.slots.end());
  slots.insert(b.slots.begin(), b.slots.end());
  return {{intents.begin(), intents.end()}, {slots.begin(), slots.end()}};
}

void save_ontology(const Ontology& ontology, const std::string& path) {
  json doc;
  doc["intents"] = json::array();
  doc["slots"] = json::array();
  for (const auto& n : ontology.intents) doc["intents"].push_back(join_words(n));
  for (const auto& n : ontology.slots) doc["slots"].push_back(join_words(n));
  std::ofstream out(path);
  if (!out) throw DataError("cannot write ontology file: " + path);
  out << doc.dump(2) << '\n';
}

Ontology load_ontology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ontology file: " + path);
  Ontology o;
  try {
    const json doc = json::parse(in);
    for (const auto& s : doc.at("intents")) o.intents.push_back(normalize_label(s.get<std::string>()));
    for (const auto& s : doc.at("slots")) o.slots.push_back(normalize_label(s.get<std::string>()));
  } catch (const json::exception& e) {
    throw DataError("malformed ontology file " + path + ": " + e.what());
  }
  o.validate();
  return o;
}

Dataset subsample(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw ConfigError("subsample fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  if (fraction == 1.0) return data;
  std::map<Words, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < data.size(); ++i) strata[data[i].intent].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (auto& [intent, idx] : strata) {
    // The epsilon keeps exact products such as 0.05 * 100 from rounding up.
    const auto want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(idx.size()) - 1e-9));
    std::shuffle(idx.begin(), idx.end(), rng);
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(want, idx.size())));
  }
  std::sort(keep.begin(), keep.end());
  Dataset out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(data[i]);
  return out;
}

Dataset filter_domains(const Dataset& data, const std::vector<std::string>& domains) {
  Dataset out;
  for (const auto& ex : data) {
    if (std::find(domains.begin(), domains.end(), ex.domain) != domains.end()) out.push_back(ex);
  }
  return out;
}

}  // namespace t2t
