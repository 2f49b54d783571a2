"""Text-to-text spoken language understanding: UT2T and CT2T decoders."""

import json

from ._core import (
    Checkpoint,
    ConfigError,
    DataError,
    Error,
    Example,
    Frame,
    NumericError,
    Ontology,
    Prediction,
    Predictor,
    ShapeError,
    SlotPair,
    TrainResult,
    build_target_frame,
    evaluate,
    extract_ontology,
    gradcheck,
    load_checkpoint,
    load_dataset,
    load_ontology,
    normalize_label,
    parse_output,
    predict_all,
    run_cli,
    save_checkpoint,
    save_dataset,
    save_ontology,
    serialize_frame,
    synth_corpus,
)
from . import _core


def config(preset=None, **fields):
    """Resolved training config as a dict: defaults < preset < fields."""
    return json.loads(_core.resolve_config(json.dumps(fields), preset or ""))


def checkpoint_config(checkpoint):
    return json.loads(checkpoint.config_json)


def train(train_set, valid_set, ontology=None, preset=None, **fields):
    """Trains a model; keyword arguments are config fields (decoder, epochs, ...)."""
    return _core.train(json.dumps(config(preset, **fields)), train_set, valid_set, ontology)


def fine_tune(source, train_set, valid_set, ontology=None, **fields):
    """Continues training `source`; shape fields default to the checkpoint's."""
    merged = dict(checkpoint_config(source), **fields)
    return _core.fine_tune(source, train_set, valid_set, json.dumps(merged), ontology)


def predict(checkpoint, utterance, ontology=None):
    """Greedy decode of one utterance (a string or a list of words)."""
    return Predictor(checkpoint, ontology).predict(utterance)


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
