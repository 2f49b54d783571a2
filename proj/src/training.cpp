#include "t2t/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "t2t/error.hpp"

namespace t2t {

std::vector<std::string> domains_of(const Dataset& data) {
  std::set<std::string> names;
  for (const auto& ex : data) {
    if (!ex.domain.empty()) names.insert(ex.domain);
  }
  return {names.begin(), names.end()};
}

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& valid_set,
                  std::optional<Ontology> ontology, const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  if (valid_set.empty()) throw DataError("validation set is empty");
  Ontology onto = ontology ? std::move(*ontology) : extract_ontology(train_set);
  onto.validate();
  std::vector<Words> extra = onto.intents;
  extra.insert(extra.end(), onto.slots.begin(), onto.slots.end());
  Vocab vocab = build_vocab(train_set, extra);
  Checkpoint model = make_model(config, std::move(vocab), std::move(onto), config.seed);
  model.domains = domains_of(train_set);
  return run_training(std::move(model), train_set, valid_set, hooks);
}

TrainResult fine_tune(const Checkpoint& source, const Dataset& train_set, const Dataset& valid_set,
                      const TrainConfig& config, std::optional<Ontology> ontology, const TrainHooks& hooks) {
  config.validate(true);
  const TrainConfig& have = source.config;
  if (config.decoder != have.decoder || config.embed_dim != have.embed_dim || config.hidden_dim != have.hidden_dim ||
      config.bidirectional != have.bidirectional) {
    throw ConfigError("fine-tune config does not match checkpoint: checkpoint is " + to_string(have.decoder) + " " +
                      std::to_string(have.embed_dim) + "/" + std::to_string(have.hidden_dim) + ", config is " +
                      to_string(config.decoder) + " " + std::to_string(config.embed_dim) + "/" +
                      std::to_string(config.hidden_dim));
  }
  Checkpoint model = source;
  model.config = config;
  if (ontology) {
    ontology->validate();
    model.ontology = std::move(*ontology);
  }
  if (config.epochs == 0) {
    TrainResult r;
    r.best = std::move(model);
    return r;
  }
  if (train_set.empty()) throw DataError("fine-tuning set is empty");
  if (valid_set.empty()) throw DataError("validation set is empty");
  for (auto& d : domains_of(train_set)) {
    if (std::find(model.domains.begin(), model.domains.end(), d) == model.domains.end()) model.domains.push_back(d);
  }
  std::sort(model.domains.begin(), model.domains.end());
  return run_training(std::move(model), train_set, valid_set, hooks);
}

TrainResult run_training(Checkpoint model, const Dataset& train_set, const Dataset& valid_set,
                         const TrainHooks& hooks) {
  const TrainConfig config = model.config;
  Adam adam(model.params, {config.learning_rate, config.beta1, config.beta2, config.epsilon});
  Gradients grads(model.params);
  std::mt19937_64 rng(config.seed);

  TrainResult result;
  result.best = model;
  bool have_best = false;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Tape tape;
      BatchGraph graph(tape, model, Noise{config.dropout, &rng}, config.word_dropout);
      Var total = graph.loss(train_set[order[start]]);
      for (std::size_t k = start + 1; k < end; ++k) total = add(total, graph.loss(train_set[order[k]]));
      const Var batch_loss = scale(total, 1.0 / static_cast<Real>(end - start));
      const Real value = tape.scalar(batch_loss);
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1));
      }
      tape.backward(batch_loss);
      grads.zero();
      tape.accumulate_param_grads(grads);
      if (config.clip_norm > 0) clip_global_norm(grads, config.clip_norm);
      adam.step(model.params, grads);
      model.params.round_to_storage();
      loss_sum += value;
      ++batches;
    }

    EpochLog log{epoch, loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1)),
                 evaluate(model, valid_set).sentence_accuracy};
    result.history.push_back(log);
    if (!have_best || log.valid_sentence_accuracy > result.best_valid_accuracy) {
      have_best = true;
      result.best_valid_accuracy = log.valid_sentence_accuracy;
      result.best_epoch = epoch;
      result.best.params = model.params;
    }
    if (hooks.log) {
      *hooks.log << "epoch " << epoch << " loss " << log.mean_loss << " valid_sentence_accuracy "
                 << log.valid_sentence_accuracy << '\n';
    }
    if (hooks.on_epoch) hooks.on_epoch(log);
  }
  result.best.config = config;
  return result;
}

double dataset_loss(const Checkpoint& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  double sum = 0;
  for (const auto& ex : data) {
    Tape tape(false);
    BatchGraph graph(tape, model);
    sum += tape.scalar(graph.loss(ex));
  }
  return sum / static_cast<double>(data.size());
}

TinyModel tiny_model(DecoderKind kind, std::size_t dims, std::uint64_t seed) {
  auto example = [](const char* tokens, std::vector<std::string> tags, const char* intent) {
    return TaggedExample{split_words(tokens), std::move(tags), split_words(intent), "tiny"};
  };
  TinyModel tiny;
  tiny.examples = {
      example("set an alarm for six am", {"O", "O", "O", "O", "B-date_time", "I-date_time"}, "set alarm"),
      example("weather in paris tomorrow", {"O", "O", "B-location", "B-date_time"}, "check weather"),
      // "zurich" stays out of the vocabulary, so only the copy path can score it.
      example("weather in zurich", {"O", "O", "B-location"}, "check weather"),
  };
  TrainConfig config;
  config.decoder = kind;
  config.embed_dim = config.hidden_dim = dims;
  config.dropout = 0.0;
  config.seed = seed;
  // Larger weights than the training default give gradients well above the
  // finite-difference noise floor.
  config.init_scale = 0.5;
  const Ontology ontology = extract_ontology(tiny.examples);
  std::vector<Words> names = ontology.intents;
  names.insert(names.end(), ontology.slots.begin(), ontology.slots.end());
  Vocab vocab = build_vocab(Dataset(tiny.examples.begin(), tiny.examples.end() - 1), names);
  tiny.model = make_model(config, std::move(vocab), ontology, seed);
  return tiny;
}

GradCheckReport check_model_gradients(TinyModel& tiny, const GradCheckOptions& options) {
  const Checkpoint& model = tiny.model;
  const LossBuilder loss = [&](Tape& tape, const ParamStore&) {
    BatchGraph graph(tape, model);
    Var total = graph.loss(tiny.examples.front());
    for (std::size_t i = 1; i < tiny.examples.size(); ++i) total = add(total, graph.loss(tiny.examples[i]));
    return total;
  };
  return grad_check(loss, tiny.model.params, options);
}

}  // namespace t2t
