#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "t2t/cli.hpp"
#include "t2t/error.hpp"
#include "t2t/evaluation.hpp"
#include "t2t/synth.hpp"
#include "t2t/training.hpp"

namespace py = pybind11;
using namespace t2t;

namespace {

TrainConfig parse_config(const std::string& config_json) {
  return config_from_json(nlohmann::json::parse(config_json.empty() ? "{}" : config_json));
}

Words as_words(const py::object& utterance) {
  if (py::isinstance<py::str>(utterance)) return split_words(utterance.cast<std::string>());
  return utterance.cast<Words>();
}

py::dict metrics_dict(const MetricsReport& r) {
  py::dict d;
  d["examples"] = r.examples;
  d["intent_accuracy"] = r.intent_accuracy;
  d["slot_precision"] = r.slot_precision;
  d["slot_recall"] = r.slot_recall;
  d["slot_f1"] = r.slot_f1;
  d["sentence_accuracy"] = r.sentence_accuracy;
  d["parse_error_count"] = r.parse_error_count;
  d["truncated_count"] = r.truncated_count;
  py::dict intents, slots;
  for (const auto& [label, acc] : r.per_intent) intents[py::str(label)] = acc.accuracy();
  for (const auto& [label, counts] : r.per_slot) slots[py::str(label)] = counts.f1();
  d["per_intent_accuracy"] = intents;
  d["per_slot_f1"] = slots;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Text-to-text spoken language understanding with pointer-generator and ontology-constrained decoders";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<ShapeError>(m, "ShapeError", base);
  py::register_exception<NumericError>(m, "NumericError", base);

  py::class_<TaggedExample>(m, "Example")
      .def(py::init<>())
      .def(py::init([](Words tokens, std::vector<std::string> tags, const std::string& intent, std::string domain) {
             return TaggedExample{std::move(tokens), std::move(tags), normalize_label(intent), std::move(domain)};
           }),
           py::arg("tokens"), py::arg("tags"), py::arg("intent"), py::arg("domain") = "")
      .def_readwrite("tokens", &TaggedExample::tokens)
      .def_readwrite("tags", &TaggedExample::tags)
      .def_readwrite("intent", &TaggedExample::intent)
      .def_readwrite("domain", &TaggedExample::domain)
      .def(py::self == py::self)
      .def("__repr__", [](const TaggedExample& e) { return "<Example \"" + join_words(e.tokens) + "\">"; });

  py::class_<SlotPair>(m, "SlotPair")
      .def(py::init<Words, Words>(), py::arg("name"), py::arg("value"))
      .def_readwrite("name", &SlotPair::name)
      .def_readwrite("value", &SlotPair::value)
      .def(py::self == py::self);

  py::class_<Frame>(m, "Frame")
      .def(py::init<>())
      .def(py::init<Words, std::vector<SlotPair>>(), py::arg("intent"), py::arg("slots") = std::vector<SlotPair>{})
      .def_readwrite("intent", &Frame::intent)
      .def_readwrite("slots", &Frame::slots)
      .def(py::self == py::self)
      .def("__repr__", [](const Frame& f) { return "<Frame \"" + join_words(serialize_frame(f)) + "\">"; });

  py::class_<Ontology>(m, "Ontology")
      .def(py::init<>())
      .def(py::init<std::vector<Words>, std::vector<Words>>(), py::arg("intents"), py::arg("slots"))
      .def_readwrite("intents", &Ontology::intents)
      .def_readwrite("slots", &Ontology::slots)
      .def("validate", &Ontology::validate)
      .def(py::self == py::self);

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_property_readonly("kind", [](const Checkpoint& c) { return to_string(c.kind()); })
      .def_property_readonly("config_json", [](const Checkpoint& c) { return to_json(c.config).dump(); })
      .def_readonly("ontology", &Checkpoint::ontology)
      .def_readonly("domains", &Checkpoint::domains)
      .def_property_readonly("vocab_size", [](const Checkpoint& c) { return c.vocab.size(); })
      .def("to_bytes",
           [](const Checkpoint& c) {
             std::ostringstream out;
             write_checkpoint(c, out);
             return py::bytes(out.str());
           })
      .def_static("from_bytes", [](const py::bytes& data) {
        std::istringstream in(std::string{data});
        return read_checkpoint(in);
      });

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("frame", &Prediction::frame)
      .def_readonly("output", &Prediction::output)
      .def_readonly("truncated", &Prediction::truncated)
      .def_property_readonly("parse_error", [](const Prediction& p) -> std::optional<std::string> {
        if (!p.parse_error) return std::nullopt;
        return to_string(*p.parse_error);
      });

  py::class_<Predictor>(m, "Predictor")
      .def(py::init<const Checkpoint&, std::optional<Ontology>>(), py::arg("checkpoint"),
           py::arg("ontology") = std::nullopt, py::keep_alive<1, 2>())
      .def("predict", [](Predictor& p, const py::object& utterance) { return p.predict(as_words(utterance)); });

  py::class_<EpochLog>(m, "EpochLog")
      .def_readonly("epoch", &EpochLog::epoch)
      .def_readonly("mean_loss", &EpochLog::mean_loss)
      .def_readonly("valid_sentence_accuracy", &EpochLog::valid_sentence_accuracy);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("best", &TrainResult::best)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("best_valid_accuracy", &TrainResult::best_valid_accuracy)
      .def_readonly("history", &TrainResult::history);

  m.def("normalize_label", &normalize_label, py::arg("label"));
  m.def("serialize_frame", &serialize_frame, py::arg("frame"));
  m.def(
      "parse_output",
      [](const Words& tokens) -> std::pair<Frame, std::optional<std::string>> {
        ParsedOutput p = parse_output(tokens);
        std::optional<std::string> error;
        if (p.error) error = to_string(*p.error);
        return {std::move(p.frame), error};
      },
      py::arg("tokens"));
  m.def("build_target_frame", &build_target_frame, py::arg("example"));
  m.def("extract_ontology", &extract_ontology, py::arg("data"));

  m.def(
      "load_dataset",
      [](const std::string& path, bool strict) {
        LoadOptions opt;
        opt.bio = strict ? BioPolicy::strict : BioPolicy::repair;
        return load_dataset(path, opt);
      },
      py::arg("path"), py::arg("strict") = false);
  m.def("save_dataset", &save_dataset, py::arg("data"), py::arg("path"));
  m.def("load_ontology", &load_ontology, py::arg("path"));
  m.def("save_ontology", &save_ontology, py::arg("ontology"), py::arg("path"));

  m.def(
      "synth_corpus",
      [](std::size_t count, std::uint64_t seed, const std::string& pool, const std::vector<std::string>& domains) {
        SynthSpec spec = default_synth_spec();
        if (!domains.empty()) spec = spec.select(domains);
        if (pool != "regular" && pool != "oov") throw ConfigError("pool must be regular or oov, got " + pool);
        SynthCorpus c = synth_corpus(spec, count, seed, pool == "oov" ? ValuePool::oov : ValuePool::regular);
        return std::make_pair(std::move(c.data), std::move(c.ontology));
      },
      py::arg("count"), py::arg("seed") = 7, py::arg("pool") = "regular",
      py::arg("domains") = std::vector<std::string>{});

  m.def(
      "resolve_config",
      [](const std::string& config_json, const std::string& preset) {
        TrainConfig base;
        if (preset == "asmixed") {
          base = TrainConfig::asmixed_preset();
        } else if (preset == "mtod") {
          base = TrainConfig::mtod_preset();
        } else if (!preset.empty()) {
          throw ConfigError("unknown preset " + preset);
        }
        return to_json(config_from_json(nlohmann::json::parse(config_json.empty() ? "{}" : config_json), base)).dump();
      },
      py::arg("config_json") = "", py::arg("preset") = "");

  m.def(
      "train",
      [](const std::string& config_json, const Dataset& train_set, const Dataset& valid_set,
         std::optional<Ontology> ontology) {
        const TrainConfig config = parse_config(config_json);
        py::gil_scoped_release release;
        return train(config, train_set, valid_set, std::move(ontology));
      },
      py::arg("config_json"), py::arg("train_set"), py::arg("valid_set"), py::arg("ontology") = std::nullopt);
  m.def(
      "fine_tune",
      [](const Checkpoint& source, const Dataset& train_set, const Dataset& valid_set, const std::string& config_json,
         std::optional<Ontology> ontology) {
        const TrainConfig config = parse_config(config_json);
        py::gil_scoped_release release;
        return fine_tune(source, train_set, valid_set, config, std::move(ontology));
      },
      py::arg("source"), py::arg("train_set"), py::arg("valid_set"), py::arg("config_json"),
      py::arg("ontology") = std::nullopt);

  m.def(
      "evaluate",
      [](const Checkpoint& model, const Dataset& data, std::optional<Ontology> ontology, std::size_t threads) {
        MetricsReport r;
        {
          py::gil_scoped_release release;
          r = evaluate(model, data, std::move(ontology), threads);
        }
        return metrics_dict(r);
      },
      py::arg("checkpoint"), py::arg("data"), py::arg("ontology") = std::nullopt, py::arg("threads") = 1);
  m.def(
      "predict_all",
      [](const Checkpoint& model, const Dataset& data, std::optional<Ontology> ontology, std::size_t threads) {
        py::gil_scoped_release release;
        return predict_all(model, data, std::move(ontology), threads);
      },
      py::arg("checkpoint"), py::arg("data"), py::arg("ontology") = std::nullopt, py::arg("threads") = 1);

  m.def("save_checkpoint", &save_checkpoint, py::arg("checkpoint"), py::arg("path"));
  m.def(
      "load_checkpoint",
      [](const std::string& path, std::optional<std::string> kind) {
        std::optional<DecoderKind> expected;
        if (kind) expected = parse_decoder_kind(*kind);
        return load_checkpoint(path, expected);
      },
      py::arg("path"), py::arg("kind") = std::nullopt);

  m.def(
      "gradcheck",
      [](const std::string& decoder, std::size_t dims, std::uint64_t seed) {
        TinyModel tiny = tiny_model(parse_decoder_kind(decoder), dims, seed);
        GradCheckReport r;
        {
          py::gil_scoped_release release;
          r = check_model_gradients(tiny);
        }
        return std::make_pair(r.max_rel_error, r.checked);
      },
      py::arg("decoder"), py::arg("dims") = 8, py::arg("seed") = 1,
      "Finite-difference check of the full loss of a tiny model; returns (max relative error, entries checked).");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "t2t");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (exit code, stdout, stderr).");
}
