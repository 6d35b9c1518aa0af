"""Accumulated dialogue state and the per-slot change index.

The change index stores, for every informable slot, a link to the most recent
turn whose label assigned a *different* value to that slot, together with the
value the slot held before the current one.  Retrieval returns the user
utterance of the linked turn (the antecedent) and the previous value, or
sentinels when there is nothing to refer back to.

All values here are immutable; updates return new objects, so per-dialogue
tracking can run concurrently without shared mutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .tokenizer import tokenize
from .types import CorpusValidationError, Dialogue, Ontology, REQUEST_SLOT

# Sentinel token standing in for "no previous value" / "no antecedent".
# It is never in the embedding vocabulary, so it embeds as the zero vector.
NONE_TOKEN = "<none>"

DialogueState = dict[str, str]


def apply_turn_label(
    state: Mapping[str, str],
    turn_label,
    ontology: Ontology | None = None,
) -> DialogueState:
    """Fold one turn label into the accumulated goal state.

    Informable pairs overwrite the slot's prior value; request entries are
    turn-scoped and ignored.  The input state is not modified.  When the same
    slot appears twice in one label, the last pair wins.
    """
    new_state = dict(state)
    for slot, value in turn_label:
        if slot == REQUEST_SLOT:
            continue
        if ontology is not None:
            if slot not in ontology.informable:
                raise CorpusValidationError(f"unknown informable slot: {slot!r}")
            ontology.validate_pair(slot, value)
        new_state[slot] = value
    return new_state


@dataclass(frozen=True)
class SlotChangeIndex:
    """Per-slot link to the turn where the slot's value last changed."""

    last_change_turn: Mapping[str, int] = field(default_factory=dict)
    previous_value: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "SlotChangeIndex":
        return cls(MappingProxyType({}), MappingProxyType({}))


def update_change_index(
    index: SlotChangeIndex,
    turn_index: int,
    state_before: Mapping[str, str],
    turn_label,
) -> SlotChangeIndex:
    """Advance the index with one turn's label.

    A slot's link moves to ``turn_index`` only when the label assigns a value
    different from ``state_before``; re-informing the same value leaves the
    link in place.
    """
    if turn_index < 0:
        raise ValueError("turn_index must be >= 0")
    changes = {}
    previous = {}
    for slot, value in turn_label:
        if slot == REQUEST_SLOT:
            continue
        before = state_before.get(slot)
        if value != before:
            changes[slot] = turn_index
            previous[slot] = NONE_TOKEN if before is None else before
    if not changes:
        return index
    last = dict(index.last_change_turn)
    prev = dict(index.previous_value)
    last.update(changes)
    prev.update(previous)
    return SlotChangeIndex(MappingProxyType(last), MappingProxyType(prev))


@dataclass(frozen=True)
class AntecedentContext:
    """Tokenized retrieval result; both fields are non-empty sentinels when
    there is nothing to refer back to."""

    utterance_tokens: tuple[str, ...]
    previous_value_tokens: tuple[str, ...]

    @classmethod
    def sentinel(cls) -> "AntecedentContext":
        return cls((NONE_TOKEN,), (NONE_TOKEN,))


def lookup_antecedent(
    index: SlotChangeIndex,
    slot: str,
    dialogue: Dialogue,
    current_turn: int,
) -> AntecedentContext:
    """Retrieve the antecedent user utterance and previous value for a slot.

    Returns sentinels when the slot never changed before ``current_turn`` and
    always for the request pseudo-slot, which has no persistent value.
    """
    if current_turn < 0:
        raise ValueError("current_turn must be >= 0")
    if slot == REQUEST_SLOT:
        return AntecedentContext.sentinel()
    linked = index.last_change_turn.get(slot)
    if linked is None or linked >= current_turn:
        return AntecedentContext.sentinel()
    utterance = tuple(tokenize(dialogue.turns[linked].user_transcript))
    if not utterance:
        utterance = (NONE_TOKEN,)
    previous = index.previous_value.get(slot, NONE_TOKEN)
    value_tokens = (NONE_TOKEN,) if previous == NONE_TOKEN else tuple(tokenize(previous))
    if not value_tokens:
        value_tokens = (NONE_TOKEN,)
    return AntecedentContext(utterance, value_tokens)


def gold_change_indices(dialogue: Dialogue) -> list[SlotChangeIndex]:
    """Teacher-forced indices: element ``t`` reflects gold labels of turns
    ``0..t-1`` and is what the model may consult while scoring turn ``t``."""
    indices = [SlotChangeIndex.empty()]
    state: DialogueState = {}
    for turn in dialogue.turns[:-1]:
        indices.append(
            update_change_index(indices[-1], turn.turn_index, state, turn.turn_label)
        )
        state = apply_turn_label(state, turn.turn_label)
    return indices
