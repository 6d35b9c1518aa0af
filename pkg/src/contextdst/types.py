"""Corpus record types shared by the loaders, the tracker and the tooling.

All records are plain immutable dataclasses.  The canonical on-disk form is
the JSON produced by :func:`dialogue_to_dict`; every command that dumps
dialogues (``predict``, ``inspect-lookup``) uses it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

# Pseudo-slot under which per-turn requests appear in turn labels.  Requests
# are turn-scoped: they never enter the accumulated goal state.
REQUEST_SLOT = "request"


class CorpusParseError(ValueError):
    """A corpus file is structurally malformed."""


class CorpusValidationError(ValueError):
    """A parsed record violates the ontology or a record invariant."""


@dataclass(frozen=True)
class Act:
    """One system action, e.g. ``request(food)`` or ``inform(area=north)``."""

    act_type: str
    slot_name: str | None = None
    value: str | None = None

    def __post_init__(self) -> None:
        if not self.act_type:
            raise CorpusValidationError("act_type must be non-empty")


@dataclass(frozen=True)
class Turn:
    """A single dialogue turn.

    ``belief_state`` is the gold accumulated goal after this turn, over
    informable slots only.  ``turn_label`` holds the new information expressed
    in this turn as (slot, value) pairs; requests appear under
    :data:`REQUEST_SLOT`.
    """

    turn_index: int
    user_transcript: str
    system_transcript: str
    system_acts: tuple[Act, ...] = ()
    turn_label: tuple[tuple[str, str], ...] = ()
    belief_state: dict[str, str] = field(default_factory=dict)

    def inform_label(self) -> tuple[tuple[str, str], ...]:
        return tuple((s, v) for s, v in self.turn_label if s != REQUEST_SLOT)

    def request_label(self) -> frozenset[str]:
        return frozenset(v for s, v in self.turn_label if s == REQUEST_SLOT)


@dataclass(frozen=True)
class Dialogue:
    dialogue_id: str
    turns: tuple[Turn, ...]

    def __post_init__(self) -> None:
        for i, turn in enumerate(self.turns):
            if turn.turn_index != i:
                raise CorpusValidationError(
                    f"dialogue {self.dialogue_id}: turn_index {turn.turn_index} "
                    f"at position {i}; indices must be consecutive from 0"
                )


@dataclass(frozen=True)
class Ontology:
    """Informable slots with their candidate values, plus request types."""

    informable: dict[str, tuple[str, ...]]
    requestable: tuple[str, ...] = ()

    @property
    def slots(self) -> tuple[str, ...]:
        """All scoreable slots; requests appear as one pseudo-slot."""
        names = tuple(self.informable)
        if self.requestable:
            names = names + (REQUEST_SLOT,)
        return names

    def values(self, slot: str) -> tuple[str, ...]:
        if slot == REQUEST_SLOT:
            return self.requestable
        try:
            return self.informable[slot]
        except KeyError:
            raise CorpusValidationError(f"unknown slot: {slot!r}") from None

    def num_values(self) -> int:
        return sum(len(v) for v in self.informable.values())

    def validate_pair(self, slot: str, value: str) -> None:
        if value not in self.values(slot):
            raise CorpusValidationError(
                f"value {value!r} not in ontology for slot {slot!r}"
            )

    def fingerprint(self) -> str:
        """Stable digest used to match checkpoints against corpora."""
        payload = json.dumps(
            {"informable": {k: list(v) for k, v in sorted(self.informable.items())},
             "requestable": list(self.requestable)},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "informable": {k: list(v) for k, v in self.informable.items()},
            "requestable": list(self.requestable),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Ontology":
        return cls(
            informable={k: tuple(v) for k, v in d.get("informable", {}).items()},
            requestable=tuple(d.get("requestable", ())),
        )


def build_ontology(dialogues: list[Dialogue]) -> Ontology:
    """Fallback ontology built by scanning gold turn labels."""
    informable: dict[str, list[str]] = {}
    requestable: list[str] = []
    for dialogue in dialogues:
        for turn in dialogue.turns:
            for slot, value in turn.turn_label:
                if slot == REQUEST_SLOT:
                    if value not in requestable:
                        requestable.append(value)
                else:
                    bucket = informable.setdefault(slot, [])
                    if value not in bucket:
                        bucket.append(value)
    return Ontology(
        informable={k: tuple(sorted(v)) for k, v in informable.items()},
        requestable=tuple(sorted(requestable)),
    )


# --- canonical JSON serialization ---------------------------------------

def act_to_dict(act: Act) -> dict:
    return {"act_type": act.act_type, "slot_name": act.slot_name, "value": act.value}


def act_from_dict(d: dict) -> Act:
    return Act(d["act_type"], d.get("slot_name"), d.get("value"))


def turn_to_dict(turn: Turn) -> dict:
    return {
        "turn_index": turn.turn_index,
        "user_transcript": turn.user_transcript,
        "system_transcript": turn.system_transcript,
        "system_acts": [act_to_dict(a) for a in turn.system_acts],
        "turn_label": [[s, v] for s, v in turn.turn_label],
        "belief_state": dict(turn.belief_state),
    }


def turn_from_dict(d: dict) -> Turn:
    return Turn(
        turn_index=d["turn_index"],
        user_transcript=d["user_transcript"],
        system_transcript=d["system_transcript"],
        system_acts=tuple(act_from_dict(a) for a in d.get("system_acts", [])),
        turn_label=tuple((s, v) for s, v in d.get("turn_label", [])),
        belief_state=dict(d.get("belief_state", {})),
    )


def dialogue_to_dict(dialogue: Dialogue) -> dict:
    return {
        "dialogue_id": dialogue.dialogue_id,
        "turns": [turn_to_dict(t) for t in dialogue.turns],
    }


def dialogue_from_dict(d: dict) -> Dialogue:
    return Dialogue(
        dialogue_id=d["dialogue_id"],
        turns=tuple(turn_from_dict(t) for t in d["turns"]),
    )


def dialogues_to_json(dialogues: list[Dialogue]) -> str:
    return json.dumps([dialogue_to_dict(d) for d in dialogues], indent=2)


def dialogues_from_json(text: str) -> list[Dialogue]:
    return [dialogue_from_dict(d) for d in json.loads(text)]
