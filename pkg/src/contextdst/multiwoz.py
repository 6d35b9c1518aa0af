"""Restaurant-domain adapter for the MultiWoZ 2.0 distribution.

Expects the distributed layout: a directory holding ``data.json`` plus the
``valListFile.json`` / ``testListFile.json`` split lists, and optionally
``dialogue_acts.json``.  Only dialogues whose goal touches the restaurant
domain and no other are retained; slot names are mapped to their
domain-stripped forms (``pricerange`` becomes ``price range``, booking slots
become ``book time`` / ``book day`` / ``book people``).

MultiWoZ has no native turn labels; they are derived as the difference
between consecutive gold belief states.
"""

from __future__ import annotations

import json
from pathlib import Path

from .types import Act, CorpusParseError, Dialogue, Ontology, Turn

DOMAINS = ("taxi", "police", "hospital", "hotel", "attraction", "train", "restaurant", "bus")

RESTAURANT_SLOTS = ("food", "price range", "restaurant name", "area",
                    "book time", "book day", "book people")

_SEMI_SLOTS = {"food": "food", "pricerange": "price range",
               "name": "restaurant name", "area": "area"}
_BOOK_SLOTS = {"time": "book time", "day": "book day", "people": "book people"}
_ACT_SLOTS = {"food": "food", "price": "price range", "name": "restaurant name",
              "area": "area", "time": "book time", "day": "book day",
              "people": "book people"}
_MISSING = {"", "none", "not mentioned"}


def _norm(text) -> str:
    return str(text).strip().lower()


def _is_restaurant_only(goal: dict) -> bool:
    active = {d for d in DOMAINS if goal.get(d)}
    return active == {"restaurant"}


def _belief_from_metadata(metadata: dict) -> dict[str, str]:
    restaurant = metadata.get("restaurant", {})
    state = {}
    for raw_slot, slot in _SEMI_SLOTS.items():
        value = _norm(restaurant.get("semi", {}).get(raw_slot, ""))
        if value not in _MISSING:
            state[slot] = value
    for raw_slot, slot in _BOOK_SLOTS.items():
        value = _norm(restaurant.get("book", {}).get(raw_slot, ""))
        if value not in _MISSING:
            state[slot] = value
    return state


def _acts_for_turn(act_record, turn_number: int) -> tuple[Act, ...]:
    if not act_record:
        return ()
    raw = act_record.get(str(turn_number))
    if not isinstance(raw, dict):
        return ()
    acts = []
    for act_name, items in raw.items():
        domain, _, act_type = act_name.partition("-")
        if _norm(domain) != "restaurant" or not isinstance(items, list):
            continue
        act_type = _norm(act_type)
        for item in items:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                continue
            slot = _ACT_SLOTS.get(_norm(item[0]))
            value = _norm(item[1])
            if value in _MISSING or value == "?":
                value = None
            acts.append(Act(act_type=act_type, slot_name=slot, value=value))
    return tuple(acts)


def _dialogue_from_log(dialogue_id: str, record: dict, act_record) -> Dialogue:
    log = record.get("log", [])
    if len(log) % 2 != 0:
        # Trailing user message without a system response; drop it.
        log = log[:-1]
    turns = []
    previous_belief: dict[str, str] = {}
    for t in range(len(log) // 2):
        user_entry = log[2 * t]
        system_entry = log[2 * t + 1]
        where = f"{dialogue_id} turn {t}"
        try:
            user_text = user_entry["text"]
            belief = _belief_from_metadata(system_entry["metadata"])
        except (KeyError, TypeError) as exc:
            raise CorpusParseError(f"{where}: missing field {exc}") from None
        system_text = log[2 * t - 1]["text"] if t > 0 else ""
        label = tuple(
            (slot, value) for slot, value in belief.items()
            if previous_belief.get(slot) != value
        )
        turns.append(Turn(
            turn_index=t,
            user_transcript=str(user_text),
            system_transcript=str(system_text),
            system_acts=_acts_for_turn(act_record, t) if t > 0 else (),
            turn_label=label,
            belief_state=belief,
        ))
        previous_belief = belief
    return Dialogue(dialogue_id=dialogue_id, turns=tuple(turns))


def _read_id_list(path: Path) -> set[str]:
    ids = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            ids.add(line)
            ids.add(line.removesuffix(".json"))
    return ids


def load_multiwoz_restaurant(path: str | Path, split: str) -> list[Dialogue]:
    """Load one split of the restaurant-only subset of MultiWoZ 2.0."""
    if split not in ("train", "validation", "test"):
        raise ValueError(f"unknown split {split!r}")
    root = Path(path)
    data_path = root / "data.json" if root.is_dir() else root
    if not data_path.exists():
        raise CorpusParseError(f"no such corpus file: {data_path}")
    try:
        data = json.loads(data_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusParseError(f"{data_path}: invalid JSON: {exc}") from None

    base = data_path.parent
    val_ids = _read_id_list(base / "valListFile.json") if (base / "valListFile.json").exists() else set()
    test_ids = _read_id_list(base / "testListFile.json") if (base / "testListFile.json").exists() else set()
    acts_path = base / "dialogue_acts.json"
    acts = json.loads(acts_path.read_text(encoding="utf-8")) if acts_path.exists() else {}

    dialogues = []
    for dialogue_id in sorted(data):
        record = data[dialogue_id]
        goal = record.get("goal", {})
        if not _is_restaurant_only(goal):
            continue
        short_id = dialogue_id.removesuffix(".json")
        if split == "validation" and dialogue_id not in val_ids and short_id not in val_ids:
            continue
        if split == "test" and dialogue_id not in test_ids and short_id not in test_ids:
            continue
        if split == "train" and (
            dialogue_id in val_ids or short_id in val_ids
            or dialogue_id in test_ids or short_id in test_ids
        ):
            continue
        dialogues.append(_dialogue_from_log(short_id, record, acts.get(short_id)))
    return dialogues


def load_multiwoz_ontology(path: str | Path) -> Ontology:
    """Read the distributed ``ontology.json`` and keep restaurant slots.

    Keys look like ``restaurant-food`` or ``restaurant-book time``; anything
    from another domain is dropped.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    informable: dict[str, tuple[str, ...]] = {}
    for key, values in raw.items():
        domain, _, slot = _norm(key).partition("-")
        if domain != "restaurant":
            continue
        slot = slot.removeprefix("semi-").removeprefix("book-").strip()
        slot = {"pricerange": "price range", "name": "restaurant name",
                "time": "book time", "day": "book day", "people": "book people"}.get(slot, slot)
        if slot in RESTAURANT_SLOTS:
            seen = []
            for v in values:
                v = _norm(v)
                if v not in _MISSING and v not in seen:
                    seen.append(v)
            informable[slot] = tuple(sorted(seen))
    return Ontology(informable=informable, requestable=())
