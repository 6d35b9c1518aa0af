"""Loader for WoZ 2.0 restaurant-reservation annotation files.

The distributed format is a JSON array of dialogue records, each carrying
``dialogue_idx`` and a ``dialogue`` array of turn records with
``system_transcript``, ``transcript``, ``turn_label``, ``belief_state`` and
``system_acts``.  Raw system acts are either a bare string (a requested slot)
or a ``[slot, value]`` pair (an informed slot).
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

from .state import apply_turn_label
from .types import (
    Act,
    CorpusParseError,
    CorpusValidationError,
    Dialogue,
    Ontology,
    REQUEST_SLOT,
    Turn,
)

SPLIT_FILENAMES = {
    "train": "woz_train_en.json",
    "validation": "woz_validate_en.json",
    "test": "woz_test_en.json",
}


class CorpusWarning(UserWarning):
    """Non-fatal corpus inconsistency (e.g. gold state disagrees with labels)."""


def _norm(text) -> str:
    return str(text).strip().lower()


def _parse_act(raw, where: str) -> Act:
    if isinstance(raw, str):
        return Act(act_type="request", slot_name=_norm(raw))
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return Act(act_type="inform", slot_name=_norm(raw[0]), value=_norm(raw[1]))
    raise CorpusParseError(f"{where}: unparseable system act {raw!r}")


def _parse_belief(raw, where: str) -> dict[str, str]:
    """Accumulated inform state; request entries are turn-scoped and dropped."""
    state: dict[str, str] = {}
    if not isinstance(raw, list):
        raise CorpusParseError(f"{where}: belief_state must be a list")
    for entry in raw:
        act = entry.get("act")
        if act != "inform":
            continue
        for pair in entry.get("slots", []):
            if len(pair) != 2:
                raise CorpusParseError(f"{where}: malformed belief slot {pair!r}")
            state[_norm(pair[0])] = _norm(pair[1])
    return state


def _parse_turn(raw, position: int, where: str) -> Turn:
    try:
        transcript = raw["transcript"]
        system_transcript = raw["system_transcript"]
        label_raw = raw["turn_label"]
        belief_raw = raw["belief_state"]
        acts_raw = raw["system_acts"]
    except (KeyError, TypeError) as exc:
        raise CorpusParseError(f"{where}: missing field {exc}") from None
    turn_idx = raw.get("turn_idx", position)
    if turn_idx != position:
        raise CorpusParseError(
            f"{where}: turn_idx {turn_idx} out of order (expected {position})"
        )
    label = []
    for pair in label_raw:
        if len(pair) != 2:
            raise CorpusParseError(f"{where}: malformed turn_label entry {pair!r}")
        label.append((_norm(pair[0]), _norm(pair[1])))
    return Turn(
        turn_index=position,
        user_transcript=str(transcript),
        system_transcript=str(system_transcript),
        system_acts=tuple(_parse_act(a, where) for a in acts_raw),
        turn_label=tuple(label),
        belief_state=_parse_belief(belief_raw, where),
    )


def _validate_against_ontology(dialogue: Dialogue, ontology: Ontology) -> None:
    for turn in dialogue.turns:
        for slot, value in turn.turn_label:
            if slot not in ontology.slots:
                raise CorpusValidationError(
                    f"dialogue {dialogue.dialogue_id} turn {turn.turn_index}: "
                    f"unknown slot {slot!r}"
                )
            if value not in ontology.values(slot):
                raise CorpusValidationError(
                    f"dialogue {dialogue.dialogue_id} turn {turn.turn_index}: "
                    f"value {value!r} not in ontology for slot {slot!r}"
                )


def check_belief_consistency(dialogue: Dialogue) -> None:
    """Warn when folding the turn labels does not reproduce the gold state."""
    state: dict[str, str] = {}
    for turn in dialogue.turns:
        state = apply_turn_label(state, turn.turn_label)
        if state != turn.belief_state:
            warnings.warn(
                f"dialogue {dialogue.dialogue_id} turn {turn.turn_index}: "
                f"gold belief_state disagrees with accumulated turn labels",
                CorpusWarning,
                stacklevel=3,
            )


def load_woz_file(path: str | Path, ontology: Ontology | None = None) -> list[Dialogue]:
    """Parse one WoZ 2.0 annotation file into validated dialogues."""
    path = Path(path)
    try:
        records = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusParseError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(records, list):
        raise CorpusParseError(f"{path}: top level must be a JSON array")
    dialogues = []
    for rec_no, rec in enumerate(records):
        dialogue_id = str(rec.get("dialogue_idx", rec_no))
        turns = []
        for pos, raw_turn in enumerate(rec.get("dialogue", [])):
            where = f"{path.name} dialogue {dialogue_id} turn {pos}"
            turns.append(_parse_turn(raw_turn, pos, where))
        dialogue = Dialogue(dialogue_id=dialogue_id, turns=tuple(turns))
        if ontology is not None:
            _validate_against_ontology(dialogue, ontology)
        check_belief_consistency(dialogue)
        dialogues.append(dialogue)
    return dialogues


def load_woz_corpus(
    path: str | Path, split: str, ontology: Ontology | None = None
) -> list[Dialogue]:
    """Load one split of a WoZ 2.0 corpus.

    ``path`` may be the annotation file itself or a directory holding the
    standard split files (``woz_train_en.json`` etc.).
    """
    if split not in SPLIT_FILENAMES:
        raise ValueError(f"unknown split {split!r}; expected one of {sorted(SPLIT_FILENAMES)}")
    path = Path(path)
    if path.is_dir():
        path = path / SPLIT_FILENAMES[split]
    if not path.exists():
        raise CorpusParseError(f"no such corpus file: {path}")
    return load_woz_file(path, ontology=ontology)


def load_ontology_file(path: str | Path) -> Ontology:
    """Read an ontology JSON file: ``{"informable": {...}, "requestable": [...]}``.

    A ``request`` entry inside ``informable`` is treated as the requestable
    list (some distributions fold it in).
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    informable = {
        _norm(slot): tuple(_norm(v) for v in values)
        for slot, values in raw.get("informable", {}).items()
        if _norm(slot) != REQUEST_SLOT
    }
    requestable = [_norm(v) for v in raw.get("requestable", [])]
    folded = raw.get("informable", {}).get(REQUEST_SLOT)
    if folded and not requestable:
        requestable = [_norm(v) for v in folded]
    return Ontology(informable=informable, requestable=tuple(requestable))
