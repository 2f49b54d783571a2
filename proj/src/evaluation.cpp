#include "t2t/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <thread>

#include "t2t/error.hpp"

namespace t2t {

double SlotCounts::precision() const {
  const std::size_t predicted = true_positive + false_positive;
  if (predicted == 0) return true_positive + false_negative == 0 ? 1.0 : 0.0;
  return static_cast<double>(true_positive) / static_cast<double>(predicted);
}

double SlotCounts::recall() const {
  const std::size_t gold = true_positive + false_negative;
  if (gold == 0) return true_positive + false_positive == 0 ? 1.0 : 0.0;
  return static_cast<double>(true_positive) / static_cast<double>(gold);
}

double SlotCounts::f1() const { return f1_score(precision(), recall()); }

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

using PairKey = std::pair<std::string, std::string>;

std::map<PairKey, std::size_t> pair_counts(const std::vector<SlotPair>& slots) {
  std::map<PairKey, std::size_t> counts;
  for (const auto& p : slots) ++counts[{join_words(p.name), join_words(p.value)}];
  return counts;
}

}  // namespace

MetricsReport score_predictions(std::span<const Frame> gold, std::span<const Prediction> predicted) {
  if (gold.size() != predicted.size()) throw ConfigError("gold and prediction counts differ");
  MetricsReport r;
  r.examples = gold.size();
  SlotCounts total;
  std::size_t intent_ok = 0, sentence_ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Frame& g = gold[i];
    const Prediction& p = predicted[i];
    if (p.parse_error) ++r.parse_error_count;
    if (p.truncated) ++r.truncated_count;

    const bool intent_match = g.intent == p.frame.intent;
    intent_ok += intent_match;
    auto& gi = r.per_intent[join_words(g.intent)];
    ++gi.support;
    gi.correct += intent_match;
    if (!intent_match && !p.frame.intent.empty()) r.per_intent.try_emplace(join_words(p.frame.intent));

    const auto gc = pair_counts(g.slots);
    const auto pc = pair_counts(p.frame.slots);
    bool slots_equal = gc == pc;
    for (const auto& [key, n] : gc) {
      auto it = pc.find(key);
      const std::size_t hit = it == pc.end() ? 0 : std::min(n, it->second);
      auto& s = r.per_slot[key.first];
      s.true_positive += hit;
      s.false_negative += n - hit;
    }
    for (const auto& [key, n] : pc) {
      auto it = gc.find(key);
      const std::size_t hit = it == gc.end() ? 0 : std::min(n, it->second);
      r.per_slot[key.first].false_positive += n - hit;
    }
    sentence_ok += intent_match && slots_equal;
  }
  for (const auto& [name, s] : r.per_slot) {
    total.true_positive += s.true_positive;
    total.false_positive += s.false_positive;
    total.false_negative += s.false_negative;
  }
  const double n = r.examples ? static_cast<double>(r.examples) : 1.0;
  r.intent_accuracy = r.examples ? intent_ok / n : 0.0;
  r.sentence_accuracy = r.examples ? sentence_ok / n : 0.0;
  r.slot_precision = total.precision();
  r.slot_recall = total.recall();
  r.slot_f1 = total.f1();
  return r;
}

std::vector<Prediction> predict_all(const Checkpoint& model, const Dataset& data, std::optional<Ontology> ontology,
                                    std::size_t threads) {
  std::vector<Prediction> out(data.size());
  threads = std::max<std::size_t>(1, std::min(threads, data.size()));
  auto work = [&](std::size_t begin, std::size_t end) {
    Predictor predictor(model, ontology);
    for (std::size_t i = begin; i < end; ++i) out[i] = predictor.predict(data[i].tokens);
  };
  if (threads == 1) {
    work(0, data.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (data.size() + threads - 1) / threads;
  for (std::size_t b = 0; b < data.size(); b += chunk) pool.emplace_back(work, b, std::min(data.size(), b + chunk));
  for (auto& t : pool) t.join();
  return out;
}

MetricsReport evaluate(const Checkpoint& model, const Dataset& data, std::optional<Ontology> ontology,
                       std::size_t threads) {
  const std::vector<Prediction> predicted = predict_all(model, data, std::move(ontology), threads);
  std::vector<Frame> gold;
  gold.reserve(data.size());
  for (const auto& ex : data) gold.push_back(build_target_frame(ex));
  return score_predictions(gold, predicted);
}

double value_recall(std::span<const Frame> gold, std::span<const Prediction> predicted) {
  if (gold.size() != predicted.size()) throw ConfigError("gold and prediction counts differ");
  std::size_t found = 0, total = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::map<std::string, std::size_t> pred;
    for (const auto& p : predicted[i].frame.slots) ++pred[join_words(p.value)];
    for (const auto& g : gold[i].slots) {
      ++total;
      auto it = pred.find(join_words(g.value));
      if (it != pred.end() && it->second > 0) {
        ++found;
        --it->second;
      }
    }
  }
  return total ? static_cast<double>(found) / static_cast<double>(total) : 1.0;
}

std::vector<BreakdownRow> label_breakdown(const MetricsReport& report) {
  std::vector<BreakdownRow> rows;
  for (const auto& [label, acc] : report.per_intent) rows.push_back({"intent", label, acc.support, acc.accuracy()});
  for (const auto& [label, s] : report.per_slot) {
    rows.push_back({"slot", label, s.true_positive + s.false_negative, s.f1()});
  }
  return rows;
}

std::vector<BreakdownRow> zero_shot_breakdown(const Checkpoint& model, const Dataset& data,
                                              std::optional<Ontology> ontology) {
  return label_breakdown(evaluate(model, data, std::move(ontology)));
}

std::string format_report(const MetricsReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "examples           " << r.examples << '\n';
  out << "intent accuracy    " << 100.0 * r.intent_accuracy << '\n';
  out << "slot precision     " << 100.0 * r.slot_precision << '\n';
  out << "slot recall        " << 100.0 * r.slot_recall << '\n';
  out << "slot f1            " << 100.0 * r.slot_f1 << '\n';
  out << "sentence accuracy  " << 100.0 * r.sentence_accuracy << '\n';
  out << "parse errors       " << r.parse_error_count << '\n';
  out << "truncated          " << r.truncated_count << '\n';
  out << format_breakdown(label_breakdown(r));
  return out.str();
}

std::string format_breakdown(const std::vector<BreakdownRow>& rows) {
  std::size_t width = 5;
  for (const auto& row : rows) width = std::max(width, row.label.size());
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(8) << "kind" << std::setw(static_cast<int>(width) + 2) << "label" << std::right
      << std::setw(8) << "support" << std::setw(9) << "score" << '\n';
  for (const auto& row : rows) {
    out << std::left << std::setw(8) << row.kind << std::setw(static_cast<int>(width) + 2) << row.label << std::right
        << std::setw(8) << row.support << std::setw(9) << 100.0 * row.score << '\n';
  }
  return out.str();
}

nlohmann::json report_records(const MetricsReport& r) {
  nlohmann::json out = nlohmann::json::array();
  auto cell = [&](const std::string& metric, const std::string& label, double value) {
    out.push_back({{"metric", metric}, {"label", label}, {"value", value}});
  };
  cell("intent_accuracy", "", r.intent_accuracy);
  cell("slot_precision", "", r.slot_precision);
  cell("slot_recall", "", r.slot_recall);
  cell("slot_f1", "", r.slot_f1);
  cell("sentence_accuracy", "", r.sentence_accuracy);
  cell("parse_error_count", "", static_cast<double>(r.parse_error_count));
  for (const auto& [label, acc] : r.per_intent) cell("intent_accuracy", label, acc.accuracy());
  for (const auto& [label, s] : r.per_slot) cell("slot_f1", label, s.f1());
  return out;
}

}  // namespace t2t
