#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "t2t/error.hpp"
#include "t2t/synth.hpp"
#include "t2t/training.hpp"
#include "test_util.hpp"

using namespace t2t;
using t2t::testing::make_example;

namespace {

TaggedExample troop_zero() {
  return make_example("play the movie Troop Zero", {"O", "O", "B-object type", "B-object name", "I-object name"},
                      "search create work");
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("t2t_corpus_" + name);
}

}  // namespace

TEST_CASE("load_dataset reads records in file order") {
  std::istringstream in(
      R"({"tokens":["cancel","my","alarm"],"tags":["O","O","O"],"intent":"cancel alarm"})"
      "\n\n"
      R"({"tokens":["wake","me","tomorrow"],"tags":["O","B-datetime","I-datetime"],"intent":"set_alarm","domain":"alarm"})"
      "\n");
  const Dataset data = read_dataset(in);
  REQUIRE(data.size() == 2);
  CHECK(data[0].intent == Words{"cancel", "alarm"});
  CHECK(extract_slot_pairs(data[0].tokens, data[0].tags).empty());
  CHECK(data[1].intent == Words{"set", "alarm"});
  CHECK(data[1].domain == "alarm");
  const auto spans = extract_slot_spans(data[1].tokens, data[1].tags);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].end - spans[0].begin == 2);
}

TEST_CASE("length mismatch names the line") {
  std::istringstream in(
      R"({"tokens":["a"],"tags":["O"],"intent":"x"})"
      "\n"
      R"({"tokens":["a","b","c"],"tags":["O","O"],"intent":"x"})"
      "\n");
  try {
    read_dataset(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("length mismatch at line 2") != std::string::npos);
  }
}

TEST_CASE("malformed records and tags are data errors with line numbers") {
  std::istringstream bad_json("{\"tokens\": [\n");
  CHECK_THROWS_AS(read_dataset(bad_json), DataError);
  std::istringstream bad_tag(R"({"tokens":["a"],"tags":["X-foo"],"intent":"x"})");
  CHECK_THROWS_WITH_AS(read_dataset(bad_tag), doctest::Contains("line 1"), DataError);
  CHECK_THROWS_WITH_AS(load_dataset("/nonexistent/file.jsonl"), doctest::Contains("/nonexistent/file.jsonl"),
                       DataError);
}

TEST_CASE("orphan I-tags are repaired by default and rejected in strict mode") {
  const std::string line = R"({"tokens":["at","noon"],"tags":["O","I-time"],"intent":"x"})";
  std::istringstream in(line);
  std::ostringstream log;
  const Dataset data = read_dataset(in, {BioPolicy::repair, &log});
  CHECK(data[0].tags == std::vector<std::string>{"O", "B-time"});
  CHECK(log.str().find("repaired") != std::string::npos);

  std::istringstream strict_in(line);
  CHECK_THROWS_AS(read_dataset(strict_in, {BioPolicy::strict, nullptr}), DataError);

  // An I-tag continuing a different slot is an orphan too.
  TaggedExample ex = make_example("a b", {"B-x", "I-y"}, "i");
  CHECK(validate_example(ex, BioPolicy::repair) == 1);
  CHECK(ex.tags[1] == "B-y");
}

TEST_CASE("slot pairs follow token order") {
  const TaggedExample ex = troop_zero();
  const auto pairs = extract_slot_pairs(ex.tokens, ex.tags);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == SlotPair{{"object", "type"}, {"movie"}});
  CHECK(pairs[1] == SlotPair{{"object", "name"}, {"Troop", "Zero"}});

  CHECK(extract_slot_pairs({"a", "b"}, {"O", "O"}).empty());

  // Two disjoint runs of one slot: tokens 0-1 and 3.
  const auto twice = extract_slot_pairs({"x", "y", "and", "z", "end"}, {"B-d", "I-d", "O", "B-d", "O"});
  REQUIRE(twice.size() == 2);
  CHECK(twice[0] == SlotPair{{"d"}, {"x", "y"}});
  CHECK(twice[1] == SlotPair{{"d"}, {"z"}});

  // Adjacent B-tags of the same slot are separate pairs.
  CHECK(extract_slot_pairs({"a", "b"}, {"B-d", "B-d"}).size() == 2);
}

TEST_CASE("target frame puts the intent first") {
  const Frame f = build_target_frame(troop_zero());
  CHECK(f.intent == Words{"search", "create", "work"});
  CHECK(f.slots.size() == 2);
  CHECK(build_target_frame(make_example("cancel my alarm", {"O", "O", "O"}, "cancel alarm")) ==
        Frame{{"cancel", "alarm"}, {}});
  CHECK(parse_output(serialize_frame(f)).frame == f);
}

TEST_CASE("labels are normalised") {
  CHECK(normalize_label("object_name") == Words{"object", "name"});
  CHECK(normalize_label("SearchCreativeWork") == Words{"search", "creative", "work"});
  CHECK(normalize_label("  Date  Time ") == Words{"date", "time"});
  CHECK(normalize_label("a/b.c") == Words{"a", "b", "c"});
  CHECK(normalize_tags({"O", "B-object_name", "I-object_name"}) ==
        std::vector<std::string>{"O", "B-object name", "I-object name"});
}

TEST_CASE("BIO tags survive extraction and re-projection") {
  const SynthCorpus corpus = synth_corpus(default_synth_spec(), 500, 3);
  for (const auto& ex : corpus.data) {
    const auto spans = extract_slot_spans(ex.tokens, ex.tags);
    CHECK(spans_to_tags(ex.tokens.size(), spans) == normalize_tags(ex.tags));
    const auto b_count = std::count_if(ex.tags.begin(), ex.tags.end(), [](const auto& t) { return t[0] == 'B'; });
    CHECK(build_target_frame(ex).slots.size() == static_cast<std::size_t>(b_count));
  }
}

TEST_CASE("ontology extraction is sorted and deduplicated") {
  const Dataset data = {make_example("a", {"O"}, "set alarm"), make_example("b c", {"B-date time", "O"}, "cancel alarm"),
                        make_example("d", {"B-date_time"}, "set alarm")};
  const Ontology o = extract_ontology(data);
  CHECK(o.intents == std::vector<Words>{{"cancel", "alarm"}, {"set", "alarm"}});
  CHECK(o.slots == std::vector<Words>{{"date", "time"}});
  CHECK_THROWS_AS(extract_ontology({}), DataError);

  const Ontology other{{{"find", "weather"}, {"set", "alarm"}}, {{"location"}}};
  const Ontology merged = merge_ontologies(o, other);
  CHECK(merged.intents == std::vector<Words>{{"cancel", "alarm"}, {"find", "weather"}, {"set", "alarm"}});
  CHECK(merged.slots == std::vector<Words>{{"date", "time"}, {"location"}});
  CHECK(merged.intent_index({"find", "weather"}) == 1u);
  CHECK_FALSE(merged.slot_index({"nothing"}).has_value());
}

TEST_CASE("ontology validation rejects empty and duplicate names") {
  CHECK_THROWS_AS((Ontology{{{"a"}, {"a"}}, {}}.validate()), DataError);
  CHECK_THROWS_AS((Ontology{{{}}, {}}.validate()), DataError);
  CHECK_NOTHROW((Ontology{{{"a"}}, {{"b"}}}.validate()));
}

TEST_CASE("subsample is stratified with ceiling per intent") {
  Dataset data;
  for (int i = 0; i < 1000; ++i) {
    data.push_back(make_example("w" + std::to_string(i), {"O"}, "intent " + std::to_string(i % 4)));
  }
  CHECK(subsample(data, 1.0, 9) == data);

  const Dataset small = subsample(data, 0.01, 9);
  CHECK(small.size() == 12);
  std::map<Words, int> per_intent;
  for (const auto& ex : small) ++per_intent[ex.intent];
  CHECK(per_intent.size() == 4);
  for (const auto& [intent, n] : per_intent) CHECK(n == 3);

  CHECK(subsample(data, 0.01, 9) == small);
  CHECK(subsample(data, 0.05, 9).size() == 52);  // ceil(12.5) = 13 per intent

  // Subset, in source order.
  std::size_t cursor = 0;
  for (const auto& ex : small) {
    while (cursor < data.size() && !(data[cursor] == ex)) ++cursor;
    CHECK(cursor < data.size());
  }

  CHECK_THROWS_AS(subsample(data, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(subsample(data, -0.5, 1), ConfigError);
  CHECK_THROWS_AS(subsample(data, 1.5, 1), ConfigError);
}

TEST_CASE("subsample size stays within the number of strata of the target") {
  const Dataset data = synth_corpus(default_synth_spec(), 400, 5).data;
  const std::size_t strata = extract_ontology(data).intents.size();
  for (double f : {0.01, 0.1, 0.33, 0.5}) {
    const double want = f * static_cast<double>(data.size());
    const double got = static_cast<double>(subsample(data, f, 2).size());
    CHECK(std::abs(got - want) <= static_cast<double>(strata));
  }
}

TEST_CASE("default synthetic corpus") {
  const SynthSpec spec = default_synth_spec();
  const SynthCorpus corpus = synth_corpus(spec, 300, 7);
  CHECK(corpus.data.size() == 300);
  CHECK(domains_of(corpus.data) == std::vector<std::string>{"alarm", "reminder", "weather"});
  for (auto ex : corpus.data) CHECK(validate_example(ex, BioPolicy::strict) == 0);

  std::set<std::string> cancel_domains;
  for (const auto& d : spec.domains) {
    for (const auto& it : d.intents) {
      if (it.intent.front() == "cancel") cancel_domains.insert(d.name);
    }
  }
  CHECK(cancel_domains.count("alarm") == 1);
  CHECK(cancel_domains.count("reminder") == 1);

  const Ontology o = corpus.ontology;
  CHECK(o.slot_index({"date", "time"}).has_value());
}

TEST_CASE("synthetic regeneration is byte-identical") {
  std::ostringstream a, b, c;
  write_dataset(synth_corpus(default_synth_spec(), 300, 7).data, a);
  write_dataset(synth_corpus(default_synth_spec(), 300, 7).data, b);
  write_dataset(synth_corpus(default_synth_spec(), 300, 8).data, c);
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("held-out values share no word with the regular lexicon or templates") {
  const SynthSpec spec = default_synth_spec();
  std::set<std::string> seen;
  for (const auto& [name, lex] : spec.slots) {
    for (const auto& v : lex.values) seen.insert(v.begin(), v.end());
  }
  for (const auto& d : spec.domains) {
    for (const auto& it : d.intents) {
      seen.insert(it.intent.begin(), it.intent.end());
      for (const auto& t : it.templates) {
        for (const auto& w : split_words(t)) seen.insert(w);
      }
    }
  }
  for (const auto& [name, lex] : spec.slots) {
    REQUIRE_FALSE(lex.oov_values.empty());
    for (const auto& v : lex.oov_values) {
      for (const auto& w : v) CHECK_MESSAGE(seen.count(w) == 0, w);
    }
  }
  const SynthCorpus oov = synth_corpus(spec, 100, 1, ValuePool::oov);
  for (const auto& ex : oov.data) {
    for (const auto& p : build_target_frame(ex).slots) {
      for (const auto& w : p.value) CHECK(seen.count(w) == 0);
    }
  }
}

TEST_CASE("synthetic spec validation") {
  SynthSpec spec = default_synth_spec();
  spec.domains[0].intents[0].templates.clear();
  CHECK_THROWS_WITH_AS(synth_corpus(spec, 10, 1), doctest::Contains("empty template set"), DataError);

  SynthSpec one = default_synth_spec().select({"alarm"});
  CHECK_THROWS_AS(one.validate(), DataError);
  CHECK_THROWS_AS(default_synth_spec().select({"nope"}), ConfigError);

  SynthSpec unknown = default_synth_spec();
  unknown.domains[0].intents[0].templates = {"cancel {no such slot}"};
  CHECK_THROWS_AS(unknown.validate(), DataError);

  const auto doc = nlohmann::json::parse(R"({
    "domains": [
      {"name": "a", "intents": [{"name": "go_home", "templates": ["go home {when}"]}]},
      {"name": "b", "intents": [{"name": "stay", "templates": ["stay"]}]}
    ],
    "slots": {"when": {"values": ["now", "later today"], "oov_values": ["soonish"]}}
  })");
  const SynthSpec parsed = synth_spec_from_json(doc);
  const SynthCorpus corpus = synth_corpus(parsed, 20, 2);
  CHECK(corpus.ontology.intents == std::vector<Words>{{"go", "home"}, {"stay"}});
  CHECK(corpus.ontology.slots == std::vector<Words>{{"when"}});
}

TEST_CASE("dataset and ontology files round-trip") {
  const SynthCorpus corpus = synth_corpus(default_synth_spec(), 50, 4);
  const auto data_path = temp_path("data.jsonl");
  const auto onto_path = temp_path("ontology.json");
  save_dataset(corpus.data, data_path.string());
  save_ontology(corpus.ontology, onto_path.string());
  CHECK(load_dataset(data_path.string()) == corpus.data);
  CHECK(load_ontology(onto_path.string()) == corpus.ontology);
  std::filesystem::remove(data_path);
  std::filesystem::remove(onto_path);
}

TEST_CASE("filter_domains keeps matching examples in order") {
  const Dataset data = synth_corpus(default_synth_spec(), 60, 4).data;
  const Dataset alarm = filter_domains(data, {"alarm"});
  CHECK_FALSE(alarm.empty());
  for (const auto& ex : alarm) CHECK(ex.domain == "alarm");
  CHECK(filter_domains(data, {"alarm", "weather", "reminder"}) == data);
}
