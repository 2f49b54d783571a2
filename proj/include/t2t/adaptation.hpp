#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2t/evaluation.hpp"
#include "t2t/training.hpp"

namespace t2t {

/// Held-out domain data, already split.
struct TargetSplits {
  Dataset train;  ///< pool the fractions are drawn from
  Dataset valid;
  Dataset test;
};

struct AdaptationOptions {
  std::vector<double> fractions{0.01, 0.05};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  /// Fine-tuning settings for both arms; shape fields must match the
  /// source checkpoint. The seed is replaced by each run's seed.
  TrainConfig fine_tune;
  std::ostream* log = nullptr;
};

struct AdaptationRow {
  std::string arm;  ///< "transfer" or "from-scratch"
  double fraction = 0;
  std::uint64_t seed = 0;
  std::size_t train_examples = 0;
  double sentence_accuracy = 0;
  double intent_accuracy = 0;
  double slot_f1 = 0;
};

struct AdaptationTable {
  std::vector<AdaptationRow> rows;
  MetricsReport zero_shot;  ///< frozen source model on the held-out test split
  std::vector<BreakdownRow> zero_shot_breakdown;
};

/// Transfer fine-tunes `source`; From-Scratch trains a freshly initialised
/// model with the same configuration and vocabulary. Both use the
/// held-out ontology. Fraction 0 rows are the untouched models: the zero-shot
/// source for Transfer, the untrained model for From-Scratch.
/// Throws DataError when the held-out data shares a domain label with the
/// checkpoint's training domains.
AdaptationTable run_adaptation(const Checkpoint& source, const TargetSplits& target, const Ontology& target_ontology,
                               const AdaptationOptions& options);

/// End-to-end variant: trains the source model on `source_domains`, then
/// runs the protocol above on `held_out`. Each domain's data is split
/// 60/20/20 into train/valid/test after a seeded shuffle.
struct AdaptationPlan {
  std::vector<std::string> source_domains;
  std::string held_out;
  TrainConfig source_config;
  std::uint64_t split_seed = 1;
};

AdaptationTable run_adaptation(const Dataset& data, const AdaptationPlan& plan, const AdaptationOptions& options,
                               Checkpoint* source_out = nullptr);

/// Seeded 60/20/20 split.
TargetSplits split_dataset(const Dataset& data, std::uint64_t seed);

std::string format_adaptation(const AdaptationTable& table);
nlohmann::json adaptation_records(const AdaptationTable& table);

}  // namespace t2t
