// One PASS/FAIL line per acceptance criterion. Optional arguments select
// criteria by name substring. Exit status is 0 only if every selected
// criterion passes.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "t2t/adaptation.hpp"
#include "t2t/cli.hpp"
#include "t2t/synth.hpp"
#include "t2t/training.hpp"

using namespace t2t;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

Real total(const std::vector<Real>& v) { return std::accumulate(v.begin(), v.end(), Real{0}); }

bool sums_to_one(const std::vector<Real>& v) { return std::abs(total(v) - 1.0) <= 1e-6; }

bool nonnegative(const std::vector<Real>& v) {
  return std::all_of(v.begin(), v.end(), [](Real x) { return x >= 0.0; });
}

/// Scratch directory removed on exit.
struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("t2t_acceptance_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "t2t");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (code != kExitOk) std::cerr << e.str();
  return code;
}

Words random_words(std::mt19937_64& rng, int min_len, int max_len) {
  static const char* syllables[] = {"ka", "lo", "mi", "ne", "ru", "ta", "vo", "zi"};
  std::uniform_int_distribution<int> count(min_len, max_len), len(1, 3), syl(0, 7);
  Words out;
  for (int i = count(rng); i > 0; --i) {
    std::string w;
    for (int k = len(rng); k > 0; --k) w += syllables[syl(rng)];
    out.push_back(w);
  }
  return out;
}

Frame random_frame(std::mt19937_64& rng) {
  Frame f;
  f.intent = random_words(rng, 1, 3);
  for (int i = std::uniform_int_distribution<int>(0, 4)(rng); i > 0; --i) {
    f.slots.push_back({random_words(rng, 1, 3), random_words(rng, 1, 4)});
  }
  return f;
}

Checkpoint random_model(DecoderKind kind, const Ontology& ontology, const Words& words, std::uint64_t seed,
                        std::size_t dims, double init_scale) {
  TrainConfig c;
  c.decoder = kind;
  c.embed_dim = c.hidden_dim = dims;
  c.dropout = 0.0;
  c.init_scale = init_scale;
  c.max_decode_len = 20;
  Vocab v;
  for (const auto* names : {&ontology.intents, &ontology.slots}) {
    for (const auto& n : *names) {
      for (const auto& w : n) v.add(w);
    }
  }
  for (const auto& w : words) v.add(w);
  return make_model(c, std::move(v), ontology, seed);
}

std::vector<Frame> gold_frames(const Dataset& data) {
  std::vector<Frame> out;
  for (const auto& ex : data) out.push_back(build_target_frame(ex));
  return out;
}

// ---------------------------------------------------------------------------

Outcome gradient(DecoderKind kind) {
  const auto t0 = Clock::now();
  TinyModel tiny = tiny_model(kind, 8, 1);
  const GradCheckReport r = check_model_gradients(tiny);
  const double secs = seconds_since(t0);
  const bool shape_ok = tiny.model.config.hidden_dim == 8 && tiny.model.vocab.size() <= 30 &&
                        tiny.model.ontology.intents.size() == 2 && tiny.model.ontology.slots.size() == 2;
  return {shape_ok && r.passed(1e-4) && secs < 60.0,
          "max relative error " + fmt(r.max_rel_error, 3) + " over " + std::to_string(r.checked) + " entries, vocab " +
              std::to_string(tiny.model.vocab.size()) + ", " + fmt(secs, 3) + "s"};
}

Outcome distribution_invariants() {
  const Ontology ontology{{{"set", "alarm"}, {"cancel", "alarm"}, {"show", "alarms"}},
                          {{"date", "time"}, {"alarm", "name"}}};
  const Words lexicon = split_words("set an alarm for six am cancel my wake up show");
  std::mt19937_64 rng(2718);
  std::size_t checked = 0, violations = 0;
  auto expect = [&](bool ok) {
    ++checked;
    if (!ok) ++violations;
  };
  constexpr int kSteps = 5;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const std::size_t dims = 4 + seed % 9;
    const double scale = 0.1 + static_cast<double>(seed % 5);
    Words tokens = random_words(rng, 1, 6);
    tokens.push_back("six");
    tokens.push_back(tokens.front());

    {
      const Checkpoint m = random_model(DecoderKind::ut2t, ontology, lexicon, seed, dims, scale);
      Tape tape(false);
      const Network net(tape, m.params, m.config);
      const Encoder encoder(net);
      const Ut2tDecoder dec(net, m.vocab);
      const SourceView source = SourceView::make(tokens, m.vocab);
      const EncoderOutput enc = encoder.encode(source.ids);
      DecoderState state = dec.initial_state(enc);
      for (int t = 0; t < kSteps; ++t) {
        const Ut2tStep st = dec.step(state, enc);
        const StepDistribution d = dec.distribution(st, source);
        expect(sums_to_one(d.attention) && nonnegative(d.attention));
        expect(sums_to_one(d.vocab_probs) && nonnegative(d.vocab_probs));
        expect(d.gate >= 0.0 && d.gate <= 1.0);
        expect(sums_to_one(d.final) && nonnegative(d.final));
        state = {st.lstm, state.prev_embedding, st.context};
      }
    }
    {
      const Checkpoint m = random_model(DecoderKind::ct2t, ontology, lexicon, seed, dims, scale);
      Tape tape(false);
      const Network net(tape, m.params, m.config);
      const Encoder encoder(net);
      const Ct2tDecoder dec(net, m.vocab);
      const NameBank bank = dec.encode_ontology(encoder, ontology);
      const SourceView source = SourceView::make(tokens, m.vocab);
      const EncoderOutput enc = encoder.encode(source.ids);
      DecoderState state = dec.initial_state(enc);
      const IntentStep it = dec.intent_step(state, bank);
      const auto delta = tape.value(it.delta);
      const std::vector<Real> delta_v(delta.begin(), delta.end());
      expect(sums_to_one(delta_v) && nonnegative(delta_v));
      state = {it.lstm, bank.intent_inputs[seed % ontology.intents.size()], state.prev_context};
      for (int t = 0; t < kSteps; ++t) {
        const SlotStep st = dec.slot_step(state, enc, bank);
        const Ct2tStepDistribution d = dec.distribution(st, source);
        expect(sums_to_one(d.gamma) && nonnegative(d.gamma));
        expect(sums_to_one(d.attention) && nonnegative(d.attention));
        expect(d.gate >= 0.0 && d.gate <= 1.0);
        expect(sums_to_one(d.joint) && nonnegative(d.joint));
        state = {st.lstm, bank.slot_inputs[static_cast<std::size_t>(t) % ontology.slots.size()], st.context};
      }
    }
  }
  return {violations == 0, std::to_string(checked) + " checks over 100 seeds x 2 decoders, " +
                               std::to_string(violations) + " violations"};
}

Outcome ontology_closure() {
  const Ontology ontology{{{"set", "alarm"}, {"cancel", "alarm"}}, {{"date", "time"}, {"alarm", "name"}}};
  const Ontology disjoint{{{"find", "weather"}, {"check", "sunset"}, {"play", "music"}},
                          {{"location"}, {"weather", "attribute"}, {"artist"}}};
  const Words lexicon = split_words("set an alarm for six am cancel my wake up");
  std::mt19937_64 rng(4242);
  std::size_t decodes = 0, violations = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Checkpoint m = random_model(DecoderKind::ct2t, ontology, lexicon, seed, 8, 2.0);
    const std::string before = [&] {
      std::ostringstream s;
      write_checkpoint(m, s);
      return s.str();
    }();
    Predictor own(m);
    Predictor swapped(m, disjoint);
    for (int k = 0; k < 5; ++k) {
      const Words tokens = random_words(rng, 1, 8);
      for (auto* p : {&own, &swapped}) {
        const Prediction pred = p->predict(tokens);
        const Ontology& o = p->ontology();
        ++decodes;
        bool ok = o.intent_index(pred.frame.intent).has_value();
        for (const auto& pair : pred.frame.slots) ok = ok && o.slot_index(pair.name).has_value();
        if (!ok) ++violations;
      }
    }
    std::ostringstream after;
    write_checkpoint(m, after);
    if (after.str() != before) ++violations;
  }
  return {violations == 0 && decodes >= 1000,
          std::to_string(decodes) + " decodes (half under a disjoint ontology), " + std::to_string(violations) +
              " violations"};
}

Outcome round_trip_grammar() {
  std::mt19937_64 rng(1234);
  std::size_t frame_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const Frame f = random_frame(rng);
    const ParsedOutput p = parse_output(serialize_frame(f));
    if (!p.ok() || !(p.frame == f)) ++frame_failures;
  }
  const SynthCorpus corpus = synth_corpus(default_synth_spec(), 1000, 5);
  std::size_t bio_failures = 0;
  for (const auto& ex : corpus.data) {
    const auto tags = project_frame(ex.tokens, build_target_frame(ex));
    if (!tags || *tags != normalize_tags(ex.tags)) ++bio_failures;
  }
  return {frame_failures == 0 && bio_failures == 0,
          "1000 frames: " + std::to_string(frame_failures) + " mismatches; 1000 BIO re-projections: " +
              std::to_string(bio_failures) + " mismatches"};
}

TrainConfig overfit_config(DecoderKind kind) {
  TrainConfig c;
  c.decoder = kind;
  c.embed_dim = c.hidden_dim = 64;
  c.batch_size = 10;
  c.dropout = 0.0;
  c.epochs = 300;
  c.learning_rate = 1e-3;
  return c;
}

/// Trained overfit models, shared by the criteria that need a converged model.
struct Overfit {
  Checkpoint model;
  double accuracy = 0;
  std::size_t epoch = 0;
  double seconds = 0;
};

const Overfit& overfit(DecoderKind kind) {
  static std::map<DecoderKind, Overfit> cache;
  auto it = cache.find(kind);
  if (it != cache.end()) return it->second;
  const SynthCorpus corpus = synth_corpus(default_synth_spec(), 50, 7);
  const auto t0 = Clock::now();
  TrainResult r = train(overfit_config(kind), corpus.data, corpus.data, corpus.ontology);
  Overfit o;
  o.seconds = seconds_since(t0);
  o.accuracy = evaluate(r.best, corpus.data).sentence_accuracy;
  o.epoch = r.best_epoch;
  o.model = std::move(r.best);
  return cache.emplace(kind, std::move(o)).first->second;
}

Outcome overfit_convergence() {
  const Overfit& ct = overfit(DecoderKind::ct2t);
  const Overfit& ut = overfit(DecoderKind::ut2t);
  return {ct.accuracy >= 0.95 && ut.accuracy >= 0.90 && ct.seconds < 300 && ut.seconds < 300,
          "ct2t " + fmt(100 * ct.accuracy) + "% (best epoch " + std::to_string(ct.epoch) + ", " + fmt(ct.seconds, 3) +
              "s), ut2t " + fmt(100 * ut.accuracy) + "% (best epoch " + std::to_string(ut.epoch) + ", " +
              fmt(ut.seconds, 3) + "s)"};
}

/// Keeps the held-out values whose lexicon index has the given parity, so
/// validation and test OOV values are disjoint.
SynthSpec oov_half(SynthSpec spec, std::size_t parity) {
  for (auto& [name, lex] : spec.slots) {
    std::vector<Words> keep;
    for (std::size_t i = 0; i < lex.oov_values.size(); ++i) {
      if (i % 2 == parity || lex.oov_values.size() < 2) keep.push_back(lex.oov_values[i]);
    }
    lex.oov_values = std::move(keep);
  }
  return spec;
}

Outcome oov_recall() {
  const SynthSpec spec = default_synth_spec();
  const SynthCorpus train_set = synth_corpus(spec, 200, 11);
  const Dataset valid = synth_corpus(oov_half(spec, 0), 60, 12, ValuePool::oov).data;
  const Dataset test = synth_corpus(oov_half(spec, 1), 100, 13, ValuePool::oov).data;

  // Test values never occur in training.
  std::set<std::string> train_words;
  for (const auto& ex : train_set.data) train_words.insert(ex.tokens.begin(), ex.tokens.end());
  std::size_t leaked = 0;
  for (const auto& f : gold_frames(test)) {
    for (const auto& pair : f.slots) {
      for (const auto& w : pair.value) leaked += train_words.count(w);
    }
  }

  bool pass = leaked == 0;
  std::string detail;
  for (auto kind : {DecoderKind::ut2t, DecoderKind::ct2t}) {
    TrainConfig c;
    c.decoder = kind;
    c.embed_dim = c.hidden_dim = 64;
    c.batch_size = 16;
    c.learning_rate = 3e-3;
    c.dropout = 0.2;
    c.word_dropout = 0.3;
    c.epochs = 100;
    const TrainResult r = train(c, train_set.data, valid, train_set.ontology);
    const auto preds = predict_all(r.best, test, std::nullopt, 4);
    const double recall = value_recall(gold_frames(test), preds);
    pass = pass && recall > 0.8;
    detail += (detail.empty() ? "" : ", ") + to_string(kind) + " value recall " + fmt(recall);
  }
  return {pass, detail + ", " + std::to_string(leaked) + " test value words seen in training"};
}

/// The adaptation experiment, shared by its two criteria.
struct Adaptation {
  AdaptationTable table;
  Ontology held_ontology;
  std::vector<std::string> source_verbs;
  double seconds = 0;
};

const Adaptation& adaptation() {
  static std::optional<Adaptation> cached;
  if (cached) return *cached;
  const SynthCorpus corpus = synth_corpus(default_synth_spec(), 1500, 7);
  AdaptationPlan plan;
  plan.source_domains = {"alarm", "weather"};
  plan.held_out = "reminder";
  TrainConfig& c = plan.source_config;
  c.decoder = DecoderKind::ct2t;
  c.embed_dim = c.hidden_dim = 64;
  c.batch_size = 16;
  c.learning_rate = 3e-3;
  c.dropout = 0.2;
  c.word_dropout = 0.3;
  c.epochs = 40;
  AdaptationOptions opt;
  opt.fractions = {0.01, 0.05};
  opt.seeds = {1, 2, 3, 4, 5};
  opt.fine_tune = c;
  opt.fine_tune.batch_size = 8;
  const auto t0 = Clock::now();
  Adaptation a;
  a.table = run_adaptation(corpus.data, plan, opt);
  a.seconds = seconds_since(t0);
  a.held_ontology = extract_ontology(filter_domains(corpus.data, {plan.held_out}));
  for (const auto& intent : extract_ontology(filter_domains(corpus.data, plan.source_domains)).intents) {
    a.source_verbs.push_back(intent.front());
  }
  cached = std::move(a);
  return *cached;
}

Outcome adaptation_trend() {
  const Adaptation& a = adaptation();
  bool pass = true;
  std::string detail;
  for (double fraction : {0.01, 0.05}) {
    std::map<std::uint64_t, double> transfer, scratch;
    for (const auto& row : a.table.rows) {
      if (row.fraction != fraction) continue;
      (row.arm == "transfer" ? transfer : scratch)[row.seed] = row.sentence_accuracy;
    }
    std::size_t wins = 0;
    for (const auto& [seed, acc] : transfer) wins += acc >= scratch.at(seed);
    pass = pass && wins >= 3;
    detail += fmt(100 * fraction) + "%: transfer >= from-scratch in " + std::to_string(wins) + "/" +
              std::to_string(transfer.size()) + " seeds; ";
  }

  // Zero-shot accuracy over held-out intents whose verb a source intent shares.
  std::size_t support = 0, correct = 0, shared = 0;
  for (const auto& intent : a.held_ontology.intents) {
    if (std::find(a.source_verbs.begin(), a.source_verbs.end(), intent.front()) == a.source_verbs.end()) continue;
    ++shared;
    const auto it = a.table.zero_shot.per_intent.find(join_words(intent));
    if (it == a.table.zero_shot.per_intent.end()) continue;
    support += it->second.support;
    correct += it->second.correct;
  }
  const double accuracy = support ? static_cast<double>(correct) / static_cast<double>(support) : 0.0;
  const double chance = 1.0 / static_cast<double>(a.held_ontology.intents.size());
  pass = pass && shared > 0 && accuracy >= 3.0 * chance;
  detail += "zero-shot shared-verb intent accuracy " + fmt(100 * accuracy) + "% vs 3x chance " + fmt(300 * chance) +
            "% (" + std::to_string(shared) + " shared-verb intents); " + fmt(a.seconds, 3) + "s";
  return {pass, detail};
}

Outcome zero_shot_shared_slot() {
  const Adaptation& a = adaptation();
  const auto& slots = a.table.zero_shot.per_slot;
  const double shared = slots.count("date time") ? slots.at("date time").f1() : 0.0;
  const double unseen = slots.count("reminder todo") ? slots.at("reminder todo").f1() : 0.0;
  return {shared > unseen, "zero-shot F1 date time " + fmt(shared) + " vs reminder todo " + fmt(unseen)};
}

Outcome full_pipeline(const Scratch& dir) {
  // The slice is written in the documented corpus format and consumed only
  // through the command-line tool, as user-supplied data would be.
  const SynthCorpus corpus = synth_corpus(default_synth_spec(), 250, 21);
  const Dataset slice(corpus.data.begin(), corpus.data.begin() + 200);
  const Dataset held(corpus.data.begin() + 200, corpus.data.end());
  save_dataset(slice, dir("slice.jsonl"));
  save_dataset(held, dir("slice_valid.jsonl"));
  const auto t0 = Clock::now();
  bool pass = true;
  for (const std::string preset : {"asmixed", "mtod"}) {
    const std::string ckpt = dir("slice_" + preset + ".ckpt");
    pass = pass && cli({"train", "--train", dir("slice.jsonl"), "--valid", dir("slice_valid.jsonl"), "--out", ckpt,
                        "--preset", preset, "--epochs", "5"}) == kExitOk;
    std::string report;
    pass = pass && cli({"eval", "--checkpoint", ckpt, "--data", dir("slice_valid.jsonl")}, &report) == kExitOk &&
           report.find("sentence accuracy") != std::string::npos;
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 600, "train + eval with both presets on 200 examples in " + fmt(secs, 3) + "s"};
}

Outcome checkpoint_round_trip(const Scratch& dir) {
  const Dataset inputs = synth_corpus(default_synth_spec(), 100, 99).data;
  std::size_t mismatches = 0;
  for (auto kind : {DecoderKind::ct2t, DecoderKind::ut2t}) {
    const Checkpoint& model = overfit(kind).model;
    const std::string path = dir("round_trip_" + to_string(kind) + ".ckpt");
    save_checkpoint(model, path);
    const Checkpoint loaded = load_checkpoint(path, kind);
    Predictor a(model), b(loaded);
    for (const auto& ex : inputs) {
      if (a.predict(ex.tokens).output != b.predict(ex.tokens).output) ++mismatches;
    }
  }
  return {mismatches == 0, "200 decodes (100 per decoder), " + std::to_string(mismatches) + " mismatches"};
}

Outcome cli_predict(const Scratch& dir) {
  const std::string path = dir("overfit_ct2t.ckpt");
  save_checkpoint(overfit(DecoderKind::ct2t).model, path);
  std::string out;
  const int code = cli({"predict", "--checkpoint", path, "--utterance", "cancel my alarm"}, &out);
  if (!out.empty() && out.back() == '\n') out.pop_back();
  return {code == kExitOk && out == "cancel alarm", "output \"" + out + "\""};
}

}  // namespace

int main(int argc, char** argv) {
  Scratch dir;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient_ut2t", [] { return gradient(DecoderKind::ut2t); }},
      {"gradient_ct2t", [] { return gradient(DecoderKind::ct2t); }},
      {"distribution_invariants", distribution_invariants},
      {"ontology_closure", ontology_closure},
      {"round_trip_grammar", round_trip_grammar},
      {"overfit_convergence", overfit_convergence},
      {"oov_copy_recall", oov_recall},
      {"adaptation_trend", adaptation_trend},
      {"zero_shot_shared_slot", zero_shot_shared_slot},
      {"full_pipeline_slice", [&] { return full_pipeline(dir); }},
      {"checkpoint_round_trip", [&] { return checkpoint_round_trip(dir); }},
      {"cli_predict_cancel_alarm", [&] { return cli_predict(dir); }},
  };
  int failed = 0, run = 0;
  for (const auto& [name, check] : criteria) {
    if (argc > 1 && std::none_of(argv + 1, argv + argc, [&](const char* f) { return name.find(f) != std::string::npos; }))
      continue;
    ++run;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += !o.pass;
  }
  std::cout << (run - failed) << "/" << run << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
