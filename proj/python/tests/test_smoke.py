import pytest

import t2t

SMALL = dict(embed_dim=8, hidden_dim=8, epochs=2, batch_size=16, dropout=0.1, learning_rate=3e-3, seed=3)


@pytest.fixture(scope="module")
def corpus():
    return t2t.synth_corpus(60, seed=7)


def test_synth_corpus_is_deterministic(corpus):
    data, ontology = corpus
    again, _ = t2t.synth_corpus(60, seed=7)
    assert len(data) == 60
    assert data == again
    assert ["cancel", "alarm"] in ontology.intents
    assert {ex.domain for ex in data} <= {"alarm", "weather", "reminder"}


def test_frames_round_trip():
    frame = t2t.Frame(["search", "create", "work"],
                      [t2t.SlotPair(["object", "type"], ["movie"]), t2t.SlotPair(["object", "name"], ["Troop", "Zero"])])
    seq = t2t.serialize_frame(frame)
    assert " ".join(seq) == "search create work [T] object type [:] movie [T] object name [:] Troop Zero <eos>"
    parsed, error = t2t.parse_output(seq)
    assert error is None
    assert parsed == frame
    _, error = t2t.parse_output(["x", "[T]", "a", "v"])
    assert error is not None


def test_example_normalises_intent():
    ex = t2t.Example(["play", "jazz"], ["O", "B-genre"], "PlayMusic")
    assert ex.intent == ["play", "music"]
    assert t2t.build_target_frame(ex).slots[0].value == ["jazz"]


def test_config_layers():
    cfg = t2t.config("asmixed", epochs=3)
    assert cfg["dropout"] == 0.6
    assert cfg["epochs"] == 3
    with pytest.raises(t2t.ConfigError):
        t2t.config(wings=2)


@pytest.mark.parametrize("decoder", ["ct2t", "ut2t"])
def test_train_evaluate_predict_save_load(tmp_path, corpus, decoder):
    data, ontology = corpus
    result = t2t.train(data, data, decoder=decoder, **SMALL)
    model = result.best
    assert model.kind == decoder
    assert len(result.history) == 2
    assert 1 <= result.best_epoch <= 2

    metrics = t2t.evaluate(model, data, threads=2)
    assert 0.0 <= metrics["sentence_accuracy"] <= metrics["intent_accuracy"] <= 1.0
    assert metrics["examples"] == 60

    pred = t2t.predict(model, "cancel my alarm")
    assert pred.output[-1] == "<eos>" or pred.truncated

    path = str(tmp_path / "model.ckpt")
    t2t.save_checkpoint(model, path)
    loaded = t2t.load_checkpoint(path, decoder)
    assert loaded.to_bytes() == model.to_bytes()
    assert t2t.Checkpoint.from_bytes(model.to_bytes()).kind == decoder
    before = [p.output for p in t2t.predict_all(model, data)]
    after = [p.output for p in t2t.predict_all(loaded, data)]
    assert before == after


def test_ontology_override_keeps_outputs_in_ontology(corpus):
    data, _ = corpus
    model = t2t.train(data, data, decoder="ct2t", **SMALL).best
    music = t2t.Ontology([["play", "music"], ["stop", "music"]], [["artist"]])
    for ex in data[:10]:
        frame = t2t.predict(model, ex.tokens, music).frame
        assert frame.intent in music.intents
        assert all(pair.name in music.slots for pair in frame.slots)


def test_fine_tune_keeps_shapes(corpus):
    data, _ = corpus
    model = t2t.train(data, data, decoder="ct2t", **SMALL).best
    tuned = t2t.fine_tune(model, data[:10], data[:10], epochs=1).best
    assert tuned.vocab_size == model.vocab_size
    with pytest.raises(t2t.ConfigError):
        t2t.fine_tune(model, data[:10], data[:10], hidden_dim=16)


@pytest.mark.parametrize("decoder", ["ct2t", "ut2t"])
def test_gradcheck(decoder):
    error, checked = t2t.gradcheck(decoder, dims=6)
    assert checked > 0
    assert error < 1e-4


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(t2t.DataError, match="nope.jsonl"):
        t2t.load_dataset(str(tmp_path / "nope.jsonl"))
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"not a model")
    with pytest.raises(t2t.DataError):
        t2t.load_checkpoint(str(bad))
    assert issubclass(t2t.DataError, t2t.Error)


def test_cli_in_process(tmp_path):
    out_path = str(tmp_path / "data.jsonl")
    code, out, err = t2t.run_cli(["synth-data", "--count", "20", "--out", out_path])
    assert code == 0
    assert "wrote 20 examples" in out
    assert "seed 7" in err
    assert len(t2t.load_dataset(out_path)) == 20
    code, _, _ = t2t.run_cli(["frobnicate"])
    assert code == 1
