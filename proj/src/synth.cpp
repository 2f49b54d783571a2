#include "t2t/synth.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "t2t/error.hpp"

namespace t2t {

using json = nlohmann::json;

namespace {

// A template piece is a literal word or, when `slot` is set, a placeholder.
struct Piece {
  std::string text;
  bool slot = false;
};

std::vector<Piece> parse_template(const std::string& tmpl) {
  std::vector<Piece> pieces;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t open = tmpl.find('{', i);
    for (auto& w : split_words(tmpl.substr(i, open == std::string::npos ? std::string::npos : open - i))) {
      if (w.find('}') != std::string::npos) throw DataError("unbalanced '}' in template: " + tmpl);
      pieces.push_back({w, false});
    }
    if (open == std::string::npos) break;
    const std::size_t close = tmpl.find('}', open);
    if (close == std::string::npos) throw DataError("unbalanced '{' in template: " + tmpl);
    const std::string name = join_words(split_words(tmpl.substr(open + 1, close - open - 1)));
    if (name.empty()) throw DataError("empty placeholder in template: " + tmpl);
    pieces.push_back({name, true});
    i = close + 1;
  }
  if (pieces.empty()) throw DataError("empty template");
  return pieces;
}

}  // namespace

void SynthSpec::validate() const {
  if (domains.size() < 2) throw DataError("synthetic spec needs at least two domains");
  std::set<std::string> names;
  for (const auto& d : domains) {
    if (d.name.empty()) throw DataError("synthetic spec has a domain without a name");
    if (!names.insert(d.name).second) throw DataError("duplicate domain in synthetic spec: " + d.name);
    if (d.intents.empty()) throw DataError("domain " + d.name + " has no intents");
    for (const auto& it : d.intents) {
      if (it.intent.empty()) throw DataError("domain " + d.name + " has an intent without a name");
      if (it.templates.empty()) {
        throw DataError("empty template set for intent " + join_words(it.intent) + " in domain " + d.name);
      }
      for (const auto& t : it.templates) {
        for (const auto& p : parse_template(t)) {
          if (!p.slot) continue;
          auto lex = slots.find(p.text);
          if (lex == slots.end()) throw DataError("template uses unknown slot {" + p.text + "}: " + t);
          if (lex->second.values.empty()) throw DataError("slot " + p.text + " has no values");
        }
      }
    }
  }
}

SynthSpec SynthSpec::select(const std::vector<std::string>& wanted) const {
  SynthSpec out;
  out.slots = slots;
  for (const auto& name : wanted) {
    auto it = std::find_if(domains.begin(), domains.end(), [&](const DomainSpec& d) { return d.name == name; });
    if (it == domains.end()) throw ConfigError("unknown domain: " + name);
    out.domains.push_back(*it);
  }
  return out;
}

Ontology SynthSpec::ontology() const {
  std::set<Words> intents, slot_names;
  for (const auto& d : domains) {
    for (const auto& it : d.intents) {
      intents.insert(it.intent);
      for (const auto& t : it.templates) {
        for (const auto& p : parse_template(t)) {
          if (p.slot) slot_names.insert(split_words(p.text));
        }
      }
    }
  }
  return {{intents.begin(), intents.end()}, {slot_names.begin(), slot_names.end()}};
}

std::vector<std::string> SynthSpec::domain_names() const {
  std::vector<std::string> out;
  for (const auto& d : domains) out.push_back(d.name);
  return out;
}

namespace {

IntentTemplates intent(const char* name, std::vector<std::string> templates) {
  return {split_words(name), std::move(templates)};
}

std::vector<Words> values(std::initializer_list<const char*> list) {
  std::vector<Words> out;
  for (const char* v : list) out.push_back(split_words(v));
  return out;
}

}  // namespace

SynthSpec default_synth_spec() {
  SynthSpec spec;
  spec.domains.push_back(
      {"alarm",
       {intent("cancel alarm", {"cancel my alarm for {date time}", "cancel the {alarm name} alarm",
                                "cancel all alarms", "delete my alarm {date time}", "cancel my alarm"}),
        intent("set alarm", {"set an alarm for {date time}", "set a {alarm name} alarm {date time}",
                             "wake me up {date time}"}),
        intent("show alarms",
               {"show my alarms", "show alarms for {date time}", "what alarms do i have {date time}"}),
        intent("snooze alarm", {"snooze my alarm", "snooze the {alarm name} alarm", "snooze alarm"}),
        intent("modify alarm", {"change my alarm to {date time}", "modify the {alarm name} alarm to {date time}",
                                "move my alarm from {date time} to {date time}"})}});
  spec.domains.push_back(
      {"weather",
       {intent("find weather", {"what is the weather in {location} {date time}",
                                "will it be {weather attribute} in {location} {date time}",
                                "is it {weather attribute} {date time}", "weather forecast for {location}"}),
        intent("check sunrise", {"when is sunrise in {location} {date time}", "what time is sunrise {date time}"}),
        intent("check sunset", {"when is sunset in {location}", "what time is sunset {date time}"})}});
  spec.domains.push_back(
      {"reminder",
       {intent("cancel reminder", {"cancel my reminder for {date time}", "cancel the reminder to {reminder todo}",
                                   "cancel all reminders", "delete my reminder {date time}", "cancel my reminder"}),
        intent("set reminder", {"set a reminder for {date time}", "set a reminder to {reminder todo} {date time}",
                                "remind me to {reminder todo}"}),
        intent("show reminders", {"show my reminders", "show reminders for {date time}",
                                  "what reminders do i have {date time}"}),
        intent("snooze reminder", {"snooze my reminder", "snooze the reminder to {reminder todo}", "snooze reminder"}),
        intent("modify reminder", {"change my reminder to {date time}", "move my reminder from {date time} to {date time}",
                                   "modify the reminder to {reminder todo}"})}});

  spec.slots["date time"] = {values({"tomorrow", "today", "tonight", "this evening", "monday morning", "at seven am",
                                     "at noon", "on friday", "next week", "at midnight", "this weekend",
                                     "tuesday night"}),
                             values({"wednesday afternoon", "thursday dawn", "half past nine", "quarter past ten",
                                     "saturday brunch", "christmas eve", "easter sunday", "eleven pm"})};
  spec.slots["alarm name"] = {values({"wake up", "workout", "medication", "school run", "nap", "gym", "meeting"}),
                              values({"yoga", "laundry", "piano lesson", "dog walk", "swim practice", "bedtime"})};
  spec.slots["reminder todo"] = {
      values({"call mom", "buy milk", "pay rent", "water the plants", "pick up kids", "send the report"}),
      values({"renew passport", "book dentist", "feed fish", "clean garage", "fix bike", "email landlord"})};
  spec.slots["location"] = {values({"paris", "london", "tokyo", "new york", "berlin", "seattle", "chicago"}),
                            values({"reykjavik", "nairobi", "lima", "kyoto", "oslo", "cairo"})};
  spec.slots["weather attribute"] = {values({"rainy", "sunny", "snowy", "windy", "cold", "hot"}),
                                     values({"foggy", "humid", "stormy", "freezing", "cloudy", "drizzly"})};
  return spec;
}

SynthSpec synth_spec_from_json(const json& doc) {
  SynthSpec spec;
  try {
    for (const auto& d : doc.at("domains")) {
      DomainSpec domain{d.at("name").get<std::string>(), {}};
      for (const auto& it : d.at("intents")) {
        domain.intents.push_back({normalize_label(it.at("name").get<std::string>()),
                                  it.at("templates").get<std::vector<std::string>>()});
      }
      spec.domains.push_back(std::move(domain));
    }
    for (const auto& [name, lex] : doc.at("slots").items()) {
      SlotLexicon l;
      for (const auto& v : lex.at("values")) l.values.push_back(split_words(v.get<std::string>()));
      if (lex.contains("oov_values")) {
        for (const auto& v : lex.at("oov_values")) l.oov_values.push_back(split_words(v.get<std::string>()));
      }
      spec.slots[join_words(split_words(name))] = std::move(l);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open synthetic spec: " + path);
  try {
    return synth_spec_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError("malformed synthetic spec " + path + ": " + e.what());
  }
}

SynthCorpus synth_corpus(const SynthSpec& spec, std::size_t count, std::uint64_t seed, ValuePool pool) {
  spec.validate();
  if (pool == ValuePool::oov) {
    for (const auto& [name, lex] : spec.slots) {
      if (lex.oov_values.empty()) throw DataError("slot " + name + " has no held-out values");
    }
  }
  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  SynthCorpus out;
  out.ontology = spec.ontology();
  out.data.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const DomainSpec& domain = spec.domains[pick(spec.domains.size())];
    const IntentTemplates& it = domain.intents[pick(domain.intents.size())];
    const std::string& tmpl = it.templates[pick(it.templates.size())];
    TaggedExample ex;
    ex.intent = it.intent;
    ex.domain = domain.name;
    for (const auto& piece : parse_template(tmpl)) {
      if (!piece.slot) {
        ex.tokens.push_back(piece.text);
        ex.tags.emplace_back("O");
        continue;
      }
      const SlotLexicon& lex = spec.slots.at(piece.text);
      const auto& choices = pool == ValuePool::oov ? lex.oov_values : lex.values;
      const Words& value = choices[pick(choices.size())];
      for (std::size_t w = 0; w < value.size(); ++w) {
        ex.tokens.push_back(value[w]);
        ex.tags.push_back((w == 0 ? "B-" : "I-") + piece.text);
      }
    }
    validate_example(ex, BioPolicy::strict);
    out.data.push_back(std::move(ex));
  }
  return out;
}

}  // namespace t2t
