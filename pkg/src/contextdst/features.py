"""Turn-level numeric inputs: tokenization plus frozen-embedding lookup for
every evidence sequence the model consumes.

Acts render as token sequences ("request food", "inform area = north"); a
turn without system acts gets a single zero-row sentinel so the act branch
always has input.  Antecedent sequences come from the slot-change index and
therefore depend on the slot being scored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingTable, embed
from .state import SlotChangeIndex, lookup_antecedent
from .tokenizer import tokenize
from .types import Act, Dialogue, Ontology, Turn


def act_tokens(act: Act) -> list[str]:
    tokens = tokenize(act.act_type)
    if act.slot_name:
        tokens += tokenize(act.slot_name)
    if act.value:
        tokens += ["="] + tokenize(act.value)
    return tokens


@dataclass(frozen=True)
class TurnFeatures:
    """Embedded sequences for one turn; antecedents are per informable slot."""

    user: np.ndarray
    system: np.ndarray
    acts: tuple[np.ndarray, ...]
    antecedent_user: dict[str, np.ndarray]
    antecedent_value: dict[str, np.ndarray]


class Featurizer:
    """Stateless assembly of model inputs from corpus records."""

    def __init__(self, table: EmbeddingTable, ontology: Ontology):
        self.table = table
        self.ontology = ontology
        self._value_cache: dict[str, list[np.ndarray]] = {}

    def value_matrices(self, slot: str) -> list[np.ndarray]:
        """Embedded token matrices for every candidate value of a slot."""
        cached = self._value_cache.get(slot)
        if cached is None:
            cached = [embed(tokenize(v), self.table) for v in self.ontology.values(slot)]
            self._value_cache[slot] = cached
        return cached

    def turn_features(
        self,
        dialogue: Dialogue,
        turn: Turn,
        index: SlotChangeIndex,
    ) -> TurnFeatures:
        user = embed(tokenize(turn.user_transcript), self.table)
        system = embed(tokenize(turn.system_transcript), self.table)
        if turn.system_acts:
            acts = tuple(embed(act_tokens(a), self.table) for a in turn.system_acts)
        else:
            acts = (embed([], self.table),)
        antecedent_user = {}
        antecedent_value = {}
        for slot in self.ontology.slots:
            ctx = lookup_antecedent(index, slot, dialogue, turn.turn_index)
            antecedent_user[slot] = embed(list(ctx.utterance_tokens), self.table)
            antecedent_value[slot] = embed(list(ctx.previous_value_tokens), self.table)
        return TurnFeatures(
            user=user,
            system=system,
            acts=acts,
            antecedent_user=antecedent_user,
            antecedent_value=antecedent_value,
        )


def corpus_vocabulary(dialogues: list[Dialogue], ontology: Ontology) -> list[str]:
    """All tokens the model can ever see for this corpus and ontology."""
    vocab: set[str] = set()
    for dialogue in dialogues:
        for turn in dialogue.turns:
            vocab.update(tokenize(turn.user_transcript))
            vocab.update(tokenize(turn.system_transcript))
            for act in turn.system_acts:
                vocab.update(act_tokens(act))
    for slot in ontology.slots:
        vocab.update(tokenize(slot))
        for value in ontology.values(slot):
            vocab.update(tokenize(value))
    vocab.add("=")
    return sorted(vocab)
