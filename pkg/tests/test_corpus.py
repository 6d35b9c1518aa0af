import json
import os
from pathlib import Path

import numpy as np
import pytest

import synth
from contextdst.embeddings import EmbeddingTable, embed
from contextdst.state import apply_turn_label
from contextdst.types import (
    CorpusParseError,
    CorpusValidationError,
    Ontology,
    build_ontology,
    dialogues_from_json,
    dialogues_to_json,
)
from contextdst.woz import CorpusWarning, load_ontology_file, load_woz_corpus, load_woz_file


def test_fixture_loads_with_expected_shape(woz_dir, fixture_ontology):
    dialogues = load_woz_corpus(woz_dir, "train", ontology=fixture_ontology)
    assert len(dialogues) == 20
    first = dialogues[0]
    assert first.turns[0].system_transcript == ""
    assert first.turns[0].turn_index == 0
    assert [t.turn_index for t in first.turns] == list(range(len(first.turns)))
    # system acts carry both request-style and inform-style entries
    acts = [a for d in dialogues for t in d.turns for a in t.system_acts]
    assert any(a.act_type == "request" for a in acts)
    assert any(a.act_type == "inform" and a.value for a in acts)


def test_split_selection(woz_dir):
    assert len(load_woz_corpus(woz_dir, "validation")) == 4
    assert len(load_woz_corpus(woz_dir, "test")) == 4
    with pytest.raises(ValueError, match="unknown split"):
        load_woz_corpus(woz_dir, "dev")


def test_empty_file_gives_empty_list(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("[]", encoding="utf-8")
    assert load_woz_file(path) == []


def test_malformed_file_names_offender(tmp_path):
    record = synth.make_woz_dialogue(__import__("random").Random(0), 17)
    del record["dialogue"][1]["transcript"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([record]), encoding="utf-8")
    with pytest.raises(CorpusParseError, match="dialogue 17 turn 1"):
        load_woz_file(path)


def test_out_of_order_turn_idx_rejected(tmp_path):
    record = synth.make_woz_dialogue(__import__("random").Random(0), 0)
    record["dialogue"][2]["turn_idx"] = 7
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([record]), encoding="utf-8")
    with pytest.raises(CorpusParseError, match="turn_idx 7 out of order"):
        load_woz_file(path)


def test_unknown_value_fails_validation(tmp_path, fixture_ontology):
    record = synth.make_woz_dialogue(__import__("random").Random(0), 0)
    record["dialogue"][0]["turn_label"] = [["food", "plutonian"]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([record]), encoding="utf-8")
    with pytest.raises(CorpusValidationError, match="plutonian"):
        load_woz_file(path, ontology=fixture_ontology)


def test_inconsistent_belief_state_warns_not_fails(tmp_path):
    record = synth.make_woz_dialogue(__import__("random").Random(0), 0)
    record["dialogue"][1]["belief_state"] = [
        {"slots": [["area", "west"]], "act": "inform"}
    ]
    path = tmp_path / "odd.json"
    path.write_text(json.dumps([record]), encoding="utf-8")
    with pytest.warns(CorpusWarning):
        dialogues = load_woz_file(path)
    assert len(dialogues) == 1


def test_gold_belief_state_matches_folded_labels(train_dialogues):
    for dialogue in train_dialogues:
        state = {}
        for turn in dialogue.turns:
            state = apply_turn_label(state, turn.turn_label)
            assert state == turn.belief_state, (dialogue.dialogue_id, turn.turn_index)


def test_canonical_round_trip(train_dialogues):
    text = dialogues_to_json(train_dialogues)
    assert dialogues_from_json(text) == train_dialogues


def test_ontology_file_and_scan_agree(woz_dir, train_dialogues, fixture_ontology):
    loaded = load_ontology_file(woz_dir / "ontology.json")
    assert set(loaded.informable) == set(fixture_ontology.informable)
    assert loaded.requestable == tuple(synth.REQUESTS)
    scanned = build_ontology(train_dialogues)
    for slot, values in scanned.informable.items():
        assert set(values) <= set(loaded.informable[slot])
    assert set(scanned.requestable) <= set(loaded.requestable)


def test_ontology_slots_and_fingerprint(fixture_ontology):
    assert fixture_ontology.slots == ("food", "area", "price range", "request")
    assert fixture_ontology.values("request") == fixture_ontology.requestable
    assert fixture_ontology.fingerprint() == fixture_ontology.fingerprint()
    other = Ontology(informable={"food": ("indian",)})
    assert other.fingerprint() != fixture_ontology.fingerprint()
    with pytest.raises(CorpusValidationError):
        fixture_ontology.values("starsign")


# --- embeddings -----------------------------------------------------------

def test_embed_oov_is_zero_row(small_table):
    matrix = embed(["unkunkunk"], small_table)
    assert matrix.shape == (1, small_table.width)
    assert np.all(matrix == 0.0)


def test_embed_empty_sequence_is_sentinel_row(small_table):
    matrix = embed([], small_table)
    assert matrix.shape == (1, small_table.width)
    assert np.all(matrix == 0.0)


def test_embed_width_constant(small_table, train_dialogues):
    from contextdst.tokenizer import tokenize
    widths = {
        embed(tokenize(t.user_transcript), small_table).shape[1]
        for d in train_dialogues for t in d.turns
    }
    assert widths == {small_table.width}


def test_embed_from_text_files(tmp_path):
    word_path = tmp_path / "word.vec"
    char_path = tmp_path / "char.vec"
    word_path.write_text("food 0.1 0.2 0.3\narea -1.0 0.5 2.0\n", encoding="utf-8")
    char_path.write_text("food 9.0 8.0\n", encoding="utf-8")
    table = EmbeddingTable.from_text_files(word_path, char_path)
    assert table.word_dim == 3 and table.char_dim == 2 and table.width == 5
    np.testing.assert_allclose(
        embed(["food"], table)[0], [0.1, 0.2, 0.3, 9.0, 8.0], rtol=1e-6
    )
    # a token missing from the char file gets a zero character block
    np.testing.assert_allclose(
        embed(["area"], table)[0], [-1.0, 0.5, 2.0, 0.0, 0.0], rtol=1e-6
    )


def test_random_table_order_independent():
    a = EmbeddingTable.random(["b", "a"], word_dim=4, char_dim=2, seed=1)
    b = EmbeddingTable.random(["a", "b", "c"], word_dim=4, char_dim=2, seed=1)
    np.testing.assert_array_equal(a.vector("a"), b.vector("a"))
    assert not np.array_equal(a.vector("a"), a.vector("b"))


@pytest.mark.skipif(
    not os.environ.get("DST_DATA_DIR")
    or not (Path(os.environ.get("DST_DATA_DIR", "")) / "woz_train_en.json").exists(),
    reason="real WoZ 2.0 corpus not available",
)
def test_real_woz_split_sizes_and_ontology():
    data_dir = Path(os.environ["DST_DATA_DIR"])
    train = load_woz_corpus(data_dir, "train")
    validation = load_woz_corpus(data_dir, "validation")
    test = load_woz_corpus(data_dir, "test")
    assert len(train) == 600
    assert len(validation) == 200
    assert len(test) == 400
    ontology = load_ontology_file(data_dir / "ontology.json")
    assert len(ontology.informable["price range"]) == 4
    assert len(ontology.informable["food"]) == 72
    assert len(ontology.informable["area"]) == 7
    assert len(ontology.requestable) == 7
