#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "t2t/evaluation.hpp"
#include "t2t/model.hpp"

namespace t2t {

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0;  ///< mean over batches of the per-batch mean sequence loss
  double valid_sentence_accuracy = 0;
};

struct TrainResult {
  Checkpoint best;  ///< parameters of the best validation epoch
  std::size_t best_epoch = 0;
  double best_valid_accuracy = 0;
  std::vector<EpochLog> history;
};

struct TrainHooks {
  std::ostream* log = nullptr;
  std::function<void(const EpochLog&)> on_epoch;
};

/// Vocabulary and (for CT2T) ontology come from `train_set`, unless an
/// ontology is supplied, in which case its words join the vocabulary.
TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& valid_set,
                  std::optional<Ontology> ontology = std::nullopt, const TrainHooks& hooks = {});

/// Continues training `source` on a new dataset. The vocabulary stays
/// fixed; a CT2T ontology may be replaced without any parameter change.
/// Model-shape fields of `config` must match the checkpoint. With zero
/// epochs the result is `source` with the new ontology.
TrainResult fine_tune(const Checkpoint& source, const Dataset& train_set, const Dataset& valid_set,
                      const TrainConfig& config, std::optional<Ontology> ontology = std::nullopt,
                      const TrainHooks& hooks = {});

/// The shared loop: per epoch shuffle, batch, Adam, validate, keep best.
/// Ties in validation accuracy keep the earlier epoch.
TrainResult run_training(Checkpoint model, const Dataset& train_set, const Dataset& valid_set,
                         const TrainHooks& hooks = {});

/// Sorted distinct non-empty domain labels.
std::vector<std::string> domains_of(const Dataset& data);

/// Mean teacher-forced loss over `data` with noise disabled.
double dataset_loss(const Checkpoint& model, const Dataset& data);

/// A tiny fixed model (2 intents, 2 slots, vocabulary under 30 words,
/// one out-of-vocabulary value) for finite-difference checks of the full
/// teacher-forced loss. Dropout is off.
struct TinyModel {
  Checkpoint model;
  Dataset examples;
};

TinyModel tiny_model(DecoderKind kind, std::size_t dims, std::uint64_t seed);

/// Gradient check of the summed loss over `tiny.examples`.
GradCheckReport check_model_gradients(TinyModel& tiny, const GradCheckOptions& options = {});

}  // namespace t2t
