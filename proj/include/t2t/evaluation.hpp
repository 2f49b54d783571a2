#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2t/model.hpp"

namespace t2t {

struct LabelAccuracy {
  std::size_t support = 0;
  std::size_t correct = 0;

  double accuracy() const { return support ? static_cast<double>(correct) / static_cast<double>(support) : 0.0; }
};

/// Pair-level counts. With no gold and no predicted pairs, precision and
/// recall are both 1 (nothing to find, nothing wrong).
struct SlotCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

/// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

struct MetricsReport {
  std::size_t examples = 0;
  double intent_accuracy = 0;
  double slot_precision = 0;
  double slot_recall = 0;
  double slot_f1 = 0;
  double sentence_accuracy = 0;
  std::size_t parse_error_count = 0;
  std::size_t truncated_count = 0;
  std::map<std::string, LabelAccuracy> per_intent;
  std::map<std::string, SlotCounts> per_slot;
};

/// Scores predictions against gold frames. Slot pairs are compared as
/// multisets per sentence; a sentence is correct when the intent matches
/// and the pair multisets are equal.
MetricsReport score_predictions(std::span<const Frame> gold, std::span<const Prediction> predicted);

/// Greedy predictions for every example, in dataset order. With
/// `threads > 1` examples are split into contiguous chunks, each decoded
/// by its own predictor.
std::vector<Prediction> predict_all(const Checkpoint& model, const Dataset& data,
                                    std::optional<Ontology> ontology = std::nullopt, std::size_t threads = 1);

MetricsReport evaluate(const Checkpoint& model, const Dataset& data, std::optional<Ontology> ontology = std::nullopt,
                       std::size_t threads = 1);

/// Fraction of gold slot values (multiset) that appear among predicted
/// values of the same sentence, regardless of slot name.
double value_recall(std::span<const Frame> gold, std::span<const Prediction> predicted);

/// Per-label scores: accuracy for intents, F1 for slots.
struct BreakdownRow {
  std::string kind;  ///< "intent" or "slot"
  std::string label;
  std::size_t support = 0;  ///< gold examples (intent) or gold pairs (slot)
  double score = 0;
};

std::vector<BreakdownRow> label_breakdown(const MetricsReport& report);
/// Evaluates a frozen model on a held-out domain and tabulates every label
/// that occurs in the gold data or the predictions.
std::vector<BreakdownRow> zero_shot_breakdown(const Checkpoint& model, const Dataset& data,
                                              std::optional<Ontology> ontology = std::nullopt);

std::string format_report(const MetricsReport& report);
std::string format_breakdown(const std::vector<BreakdownRow>& rows);
/// One record per metric cell: {"metric", "label", "value"}.
nlohmann::json report_records(const MetricsReport& report);

}  // namespace t2t
