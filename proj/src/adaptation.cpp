#include "t2t/adaptation.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "t2t/error.hpp"

namespace t2t {

namespace {

AdaptationRow make_row(std::string arm, double fraction, std::uint64_t seed, std::size_t n,
                       const MetricsReport& r) {
  return {std::move(arm), fraction, seed, n, r.sentence_accuracy, r.intent_accuracy, r.slot_f1};
}

}  // namespace

AdaptationTable run_adaptation(const Checkpoint& source, const TargetSplits& target, const Ontology& target_ontology,
                               const AdaptationOptions& options) {
  if (target.valid.empty() || target.test.empty()) throw DataError("held-out valid and test splits must be nonempty");
  for (double f : options.fractions) {
    if (!(f > 0.0) || f > 1.0) throw ConfigError("adaptation fractions must be in (0, 1]");
  }
  if (options.seeds.empty()) throw ConfigError("adaptation needs at least one seed");
  for (const auto& split : {&target.train, &target.valid, &target.test}) {
    for (const auto& d : domains_of(*split)) {
      if (std::find(source.domains.begin(), source.domains.end(), d) != source.domains.end()) {
        throw DataError("held-out domain '" + d + "' overlaps the source domains");
      }
    }
  }
  target_ontology.validate();

  AdaptationTable table;
  Checkpoint zero_shot = source;
  zero_shot.ontology = target_ontology;
  table.zero_shot = evaluate(zero_shot, target.test);
  table.zero_shot_breakdown = label_breakdown(table.zero_shot);

  for (std::uint64_t seed : options.seeds) {
    TrainConfig cfg = options.fine_tune;
    cfg.seed = seed;
    // From-Scratch keeps the source vocabulary and shape, new parameters.
    TrainConfig scratch_cfg = source.config;
    scratch_cfg.seed = seed;
    const Checkpoint scratch = make_model(scratch_cfg, source.vocab, target_ontology, seed);

    table.rows.push_back(make_row("transfer", 0.0, seed, 0, table.zero_shot));
    table.rows.push_back(make_row("from-scratch", 0.0, seed, 0, evaluate(scratch, target.test)));
    for (double fraction : options.fractions) {
      const Dataset sample = subsample(target.train, fraction, seed);
      if (sample.empty()) throw DataError("held-out training pool is empty");
      const TrainResult transfer = fine_tune(source, sample, target.valid, cfg, target_ontology);
      Checkpoint fresh = scratch;
      fresh.config = cfg;
      const TrainResult from_scratch = run_training(std::move(fresh), sample, target.valid);
      table.rows.push_back(make_row("transfer", fraction, seed, sample.size(), evaluate(transfer.best, target.test)));
      table.rows.push_back(
          make_row("from-scratch", fraction, seed, sample.size(), evaluate(from_scratch.best, target.test)));
      if (options.log) {
        const auto& a = table.rows[table.rows.size() - 2];
        const auto& b = table.rows.back();
        *options.log << "seed " << seed << " fraction " << fraction << " n " << sample.size() << " transfer "
                     << a.sentence_accuracy << " from-scratch " << b.sentence_accuracy << '\n';
      }
    }
  }
  return table;
}

TargetSplits split_dataset(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = data.size() * 3 / 5;
  const std::size_t n_valid = data.size() / 5;
  TargetSplits out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    Dataset& dst = k < n_train ? out.train : k < n_train + n_valid ? out.valid : out.test;
    dst.push_back(data[order[k]]);
  }
  return out;
}

AdaptationTable run_adaptation(const Dataset& data, const AdaptationPlan& plan, const AdaptationOptions& options,
                               Checkpoint* source_out) {
  if (plan.source_domains.size() < 2) throw ConfigError("adaptation needs at least two source domains");
  if (std::find(plan.source_domains.begin(), plan.source_domains.end(), plan.held_out) != plan.source_domains.end()) {
    throw ConfigError("held-out domain '" + plan.held_out + "' is also a source domain");
  }
  Dataset source_train, source_valid;
  for (const auto& d : plan.source_domains) {
    const Dataset part = filter_domains(data, {d});
    if (part.empty()) throw DataError("no examples for source domain '" + d + "'");
    TargetSplits s = split_dataset(part, plan.split_seed);
    source_train.insert(source_train.end(), s.train.begin(), s.train.end());
    source_valid.insert(source_valid.end(), s.valid.begin(), s.valid.end());
  }
  const Dataset held = filter_domains(data, {plan.held_out});
  if (held.empty()) throw DataError("no examples for held-out domain '" + plan.held_out + "'");
  const TargetSplits target = split_dataset(held, plan.split_seed);
  if (target.train.empty() || target.valid.empty() || target.test.empty()) {
    throw DataError("held-out domain '" + plan.held_out + "' is too small to split");
  }

  TrainHooks hooks;
  hooks.log = options.log;
  TrainResult source = train(plan.source_config, source_train, source_valid, std::nullopt, hooks);
  if (source_out) *source_out = source.best;
  return run_adaptation(source.best, target, extract_ontology(held), options);
}

std::string format_adaptation(const AdaptationTable& table) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "arm            fraction  seed  examples  sentence  intent  slot_f1\n";
  for (const auto& r : table.rows) {
    out << std::left << std::setw(15) << r.arm << std::right << std::setw(8) << 100.0 * r.fraction << '%'
        << std::setw(6) << r.seed << std::setw(10) << r.train_examples << std::setw(10) << 100.0 * r.sentence_accuracy
        << std::setw(8) << 100.0 * r.intent_accuracy << std::setw(9) << 100.0 * r.slot_f1 << '\n';
  }

  // Seeds where Transfer is at least as good as From-Scratch, per fraction.
  std::map<std::pair<double, std::uint64_t>, std::pair<double, double>> paired;
  for (const auto& r : table.rows) {
    auto& cell = paired[{r.fraction, r.seed}];
    (r.arm == "transfer" ? cell.first : cell.second) = r.sentence_accuracy;
  }
  std::map<double, std::pair<std::size_t, std::size_t>> wins;
  for (const auto& [key, acc] : paired) {
    if (key.first == 0.0) continue;
    auto& w = wins[key.first];
    w.first += acc.first >= acc.second;
    ++w.second;
  }
  for (const auto& [fraction, w] : wins) {
    out << "transfer >= from-scratch at " << 100.0 * fraction << "%: " << w.first << " of " << w.second
        << " seeds\n";
  }
  out << "\nzero-shot (frozen source model, held-out ontology)\n";
  out << "intent accuracy    " << 100.0 * table.zero_shot.intent_accuracy << '\n';
  out << "sentence accuracy  " << 100.0 * table.zero_shot.sentence_accuracy << '\n';
  out << format_breakdown(table.zero_shot_breakdown);
  return out.str();
}

nlohmann::json adaptation_records(const AdaptationTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"arm", r.arm},
                    {"fraction", r.fraction},
                    {"seed", r.seed},
                    {"train_examples", r.train_examples},
                    {"sentence_accuracy", r.sentence_accuracy},
                    {"intent_accuracy", r.intent_accuracy},
                    {"slot_f1", r.slot_f1}});
  }
  nlohmann::json breakdown = nlohmann::json::array();
  for (const auto& b : table.zero_shot_breakdown) {
    breakdown.push_back({{"kind", b.kind}, {"label", b.label}, {"support", b.support}, {"score", b.score}});
  }
  return {{"rows", rows}, {"zero_shot", report_records(table.zero_shot)}, {"zero_shot_breakdown", breakdown}};
}

}  // namespace t2t
