#include "t2t/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include "t2t/adaptation.hpp"
#include "t2t/error.hpp"
#include "t2t/synth.hpp"
#include "t2t/training.hpp"

namespace t2t {

using json = nlohmann::json;

namespace {

// One flag per TrainConfig field, named after its JSON key.
struct ConfigFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_file;
  std::string preset;

  void attach(CLI::App* app, bool with_preset) {
    const json defaults = to_json(TrainConfig{});
    for (const auto& [key, value] : defaults.items()) {
      options[key] = app->add_option("--" + key, values[key], "TrainConfig." + key);
    }
    app->add_option("--config", config_file, "JSON file with TrainConfig fields");
    if (with_preset) app->add_option("--preset", preset, "asmixed or mtod")->check(CLI::IsMember({"asmixed", "mtod"}));
  }

  /// base < preset < config file < flags.
  TrainConfig resolve(TrainConfig base) const {
    if (preset == "asmixed") base = TrainConfig::asmixed_preset();
    if (preset == "mtod") base = TrainConfig::mtod_preset();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw DataError("cannot open config file: " + config_file);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("malformed config file " + config_file + ": " + e.what());
      }
      base = config_from_json(doc, base);
    }
    json flags = json::object();
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      const std::string& text = values.at(key);
      json v = json::parse(text, nullptr, false);
      flags[key] = v.is_discarded() || v.is_string() || v.is_object() || v.is_array() ? json(text) : v;
    }
    return config_from_json(flags, base);
  }
};

void print_config(std::ostream& err, const TrainConfig& config) {
  err << "config " << to_json(config).dump() << '\n';
  err << "seed " << config.seed << '\n';
}

std::optional<Ontology> maybe_ontology(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_ontology(path);
}

std::optional<DecoderKind> maybe_kind(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_decoder_kind(text);
}

LoadOptions load_options(bool strict, std::ostream& err) { return {strict ? BioPolicy::strict : BioPolicy::repair, &err}; }

std::string printable(Words output) {
  if (!output.empty() && output.back() == kEosToken) output.pop_back();
  return join_words(output);
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << std::setw(2) << doc << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained text-to-text spoken language understanding"};
  app.require_subcommand(1);

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "Generate a synthetic multi-domain corpus");
  std::string spec_path, synth_out, synth_onto_out, pool = "regular";
  std::size_t synth_count = 300;
  std::uint64_t synth_seed = 7;
  std::vector<std::string> synth_domains;
  synth->add_option("--spec", spec_path, "JSON template spec (default: built-in alarm/weather/reminder)");
  synth->add_option("--count", synth_count, "number of examples")->capture_default_str();
  synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  synth->add_option("--pool", pool, "slot values: regular or oov")
      ->check(CLI::IsMember({"regular", "oov"}))
      ->capture_default_str();
  synth->add_option("--domains", synth_domains, "restrict to these domains")->delimiter(',');
  synth->add_option("--out", synth_out, "output JSONL dataset")->required();
  synth->add_option("--ontology-out", synth_onto_out, "also write the spec ontology");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  std::string train_path, valid_path, train_onto, train_out;
  bool strict_bio = false;
  ConfigFlags train_flags;
  train_cmd->add_option("--train", train_path, "training JSONL")->required();
  train_cmd->add_option("--valid", valid_path, "validation JSONL")->required();
  train_cmd->add_option("--ontology", train_onto, "ontology JSON (default: extracted from --train)");
  train_cmd->add_option("--out", train_out, "checkpoint to write")->required();
  train_cmd->add_flag("--strict-bio", strict_bio, "reject orphan I- tags instead of repairing them");
  train_flags.attach(train_cmd, true);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_ckpt, eval_data, eval_onto, eval_json, eval_kind;
  std::size_t eval_threads = 1;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "JSONL dataset")->required();
  eval_cmd->add_option("--ontology", eval_onto, "override the checkpoint ontology (ct2t)");
  eval_cmd->add_option("--decoder", eval_kind, "require this decoder kind");
  eval_cmd->add_option("--threads", eval_threads, "decoding threads")->capture_default_str();
  eval_cmd->add_option("--json", eval_json, "write metric records to this file");
  eval_cmd->add_flag("--strict-bio", strict_bio, "reject orphan I- tags instead of repairing them");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Decode utterances");
  std::string pred_ckpt, pred_text, pred_input, pred_onto, pred_kind;
  predict_cmd->add_option("--checkpoint", pred_ckpt, "checkpoint file")->required();
  auto* text_opt = predict_cmd->add_option("--utterance", pred_text, "one whitespace-tokenized utterance");
  auto* input_opt = predict_cmd->add_option("--input", pred_input, "file with one utterance per line");
  text_opt->excludes(input_opt);
  predict_cmd->add_option("--ontology", pred_onto, "override the checkpoint ontology (ct2t)");
  predict_cmd->add_option("--decoder", pred_kind, "require this decoder kind");

  // adapt
  auto* adapt_cmd = app.add_subcommand("adapt", "Transfer vs From-Scratch on a held-out domain");
  std::string adapt_ckpt, adapt_train, adapt_valid, adapt_test, adapt_data, adapt_onto, adapt_json;
  std::vector<double> fractions{0.01, 0.05};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::uint64_t split_seed = 1;
  ConfigFlags adapt_flags;
  adapt_cmd->add_option("--checkpoint", adapt_ckpt, "source checkpoint")->required();
  auto* at = adapt_cmd->add_option("--train", adapt_train, "held-out training pool JSONL");
  auto* av = adapt_cmd->add_option("--valid", adapt_valid, "held-out validation JSONL");
  auto* ae = adapt_cmd->add_option("--test", adapt_test, "held-out test JSONL");
  auto* ad = adapt_cmd->add_option("--data", adapt_data, "single held-out JSONL, split 60/20/20");
  ad->excludes(at)->excludes(av)->excludes(ae);
  adapt_cmd->add_option("--split-seed", split_seed, "seed for --data splitting")->capture_default_str();
  adapt_cmd->add_option("--ontology", adapt_onto, "held-out ontology (default: extracted from the held-out data)");
  adapt_cmd->add_option("--fractions", fractions, "training fractions")->delimiter(',')->capture_default_str();
  adapt_cmd->add_option("--seeds", seeds, "seeds")->delimiter(',')->capture_default_str();
  adapt_cmd->add_option("--json", adapt_json, "write the experiment table to this file");
  adapt_flags.attach(adapt_cmd, false);

  // gradcheck
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of a tiny model");
  std::string gc_kind = "ct2t";
  std::size_t gc_dims = 8;
  std::uint64_t gc_seed = 1;
  double gc_tol = 1e-4;
  GradCheckOptions gc_opts;
  gc_cmd->add_option("--decoder", gc_kind, "ut2t or ct2t")->capture_default_str();
  gc_cmd->add_option("--dims", gc_dims, "embedding and hidden size")->capture_default_str();
  gc_cmd->add_option("--seed", gc_seed, "initialisation seed")->capture_default_str();
  gc_cmd->add_option("--tolerance", gc_tol, "maximum relative error")->capture_default_str();
  gc_cmd->add_option("--step", gc_opts.step, "finite-difference step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      SynthSpec spec = spec_path.empty() ? default_synth_spec() : load_synth_spec(spec_path);
      if (!synth_domains.empty()) spec = spec.select(synth_domains);
      err << "seed " << synth_seed << '\n';
      const SynthCorpus corpus =
          synth_corpus(spec, synth_count, synth_seed, pool == "oov" ? ValuePool::oov : ValuePool::regular);
      save_dataset(corpus.data, synth_out);
      if (!synth_onto_out.empty()) save_ontology(corpus.ontology, synth_onto_out);
      out << "wrote " << corpus.data.size() << " examples (" << spec.domains.size() << " domains) to " << synth_out
          << '\n';
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      const TrainConfig config = train_flags.resolve(TrainConfig{});
      config.validate();
      print_config(err, config);
      const Dataset train_set = load_dataset(train_path, load_options(strict_bio, err));
      const Dataset valid_set = load_dataset(valid_path, load_options(strict_bio, err));
      TrainHooks hooks;
      hooks.log = &err;
      const TrainResult result = train(config, train_set, valid_set, maybe_ontology(train_onto), hooks);
      save_checkpoint(result.best, train_out);
      out << "best epoch " << result.best_epoch << " valid sentence accuracy " << std::fixed << std::setprecision(2)
          << 100.0 * result.best_valid_accuracy << '\n';
      out << "wrote " << train_out << '\n';
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      const Checkpoint model = load_checkpoint(eval_ckpt, maybe_kind(eval_kind));
      print_config(err, model.config);
      const Dataset data = load_dataset(eval_data, load_options(strict_bio, err));
      const MetricsReport report = evaluate(model, data, maybe_ontology(eval_onto), eval_threads);
      out << format_report(report);
      if (!eval_json.empty()) write_json(eval_json, report_records(report));
      return kExitOk;
    }

    if (predict_cmd->parsed()) {
      if (pred_text.empty() && pred_input.empty()) throw ConfigError("predict needs --utterance or --input");
      const Checkpoint model = load_checkpoint(pred_ckpt, maybe_kind(pred_kind));
      print_config(err, model.config);
      Predictor predictor(model, maybe_ontology(pred_onto));
      auto run = [&](const std::string& line) {
        const Words tokens = split_words(line);
        if (tokens.empty()) {
          out << '\n';
          return;
        }
        out << printable(predictor.predict(tokens).output) << '\n';
      };
      if (!pred_text.empty()) {
        run(pred_text);
      } else {
        std::ifstream in(pred_input);
        if (!in) throw DataError("cannot open input file: " + pred_input);
        for (std::string line; std::getline(in, line);) run(line);
      }
      return kExitOk;
    }

    if (adapt_cmd->parsed()) {
      const Checkpoint source = load_checkpoint(adapt_ckpt);
      AdaptationOptions options;
      options.fractions = fractions;
      options.seeds = seeds;
      options.fine_tune = adapt_flags.resolve(source.config);
      options.fine_tune.validate();
      options.log = &err;
      print_config(err, options.fine_tune);
      TargetSplits splits;
      if (!adapt_data.empty()) {
        splits = split_dataset(load_dataset(adapt_data, load_options(false, err)), split_seed);
      } else {
        if (adapt_train.empty() || adapt_valid.empty() || adapt_test.empty()) {
          throw ConfigError("adapt needs --data or all of --train, --valid and --test");
        }
        splits = {load_dataset(adapt_train, load_options(false, err)),
                  load_dataset(adapt_valid, load_options(false, err)),
                  load_dataset(adapt_test, load_options(false, err))};
      }
      Ontology onto;
      if (!adapt_onto.empty()) {
        onto = load_ontology(adapt_onto);
      } else {
        Dataset all = splits.train;
        all.insert(all.end(), splits.valid.begin(), splits.valid.end());
        all.insert(all.end(), splits.test.begin(), splits.test.end());
        onto = extract_ontology(all);
      }
      const AdaptationTable table = run_adaptation(source, splits, onto, options);
      out << format_adaptation(table);
      if (!adapt_json.empty()) write_json(adapt_json, adaptation_records(table));
      return kExitOk;
    }

    if (gc_cmd->parsed()) {
      TinyModel tiny = tiny_model(parse_decoder_kind(gc_kind), gc_dims, gc_seed);
      print_config(err, tiny.model.config);
      const GradCheckReport report = check_model_gradients(tiny, gc_opts);
      out << "decoder " << gc_kind << " dims " << gc_dims << " vocab " << tiny.model.vocab.size() << '\n';
      out << "checked " << report.checked << " of " << report.total << " parameters\n";
      out << "max relative error " << std::scientific << std::setprecision(3) << report.max_rel_error
          << " (tolerance " << gc_tol << ")\n";
      for (const auto& w : report.worst) {
        out << "  " << w.param << '[' << w.element << "] analytic " << w.analytic << " numeric " << w.numeric
            << " rel " << w.rel_error << '\n';
      }
      const bool ok = report.passed(gc_tol);
      out << (ok ? "PASS" : "FAIL") << '\n';
      return ok ? kExitOk : kExitNumeric;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace t2t
