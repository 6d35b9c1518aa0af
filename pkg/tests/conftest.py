import json

import pytest

import synth
from contextdst.embeddings import EmbeddingTable
from contextdst.features import corpus_vocabulary
from contextdst.types import Ontology
from contextdst.woz import load_woz_corpus, load_woz_file


@pytest.fixture(scope="session")
def fixture_ontology() -> Ontology:
    return Ontology(
        informable={k: tuple(v) for k, v in synth.ONTOLOGY["informable"].items()},
        requestable=tuple(synth.ONTOLOGY["requestable"]),
    )


@pytest.fixture(scope="session")
def woz_dir(tmp_path_factory):
    """Synthetic WoZ-format corpus directory with ontology and all splits."""
    return synth.write_woz_fixture(tmp_path_factory.mktemp("woz"))


@pytest.fixture(scope="session")
def figure_dialogue(tmp_path_factory):
    path = tmp_path_factory.mktemp("figure") / "figure.json"
    path.write_text(json.dumps([synth.figure_dialogue_record()]), encoding="utf-8")
    return load_woz_file(path)[0]


@pytest.fixture(scope="session")
def train_dialogues(woz_dir, fixture_ontology):
    return load_woz_corpus(woz_dir, "train", ontology=fixture_ontology)


@pytest.fixture(scope="session")
def small_table(train_dialogues, fixture_ontology) -> EmbeddingTable:
    vocab = corpus_vocabulary(train_dialogues, fixture_ontology)
    return EmbeddingTable.random(vocab, word_dim=12, char_dim=4, seed=3)
