"""Synthetic fixture corpora in the raw WoZ annotation schema.

The generated dialogues follow a small set of templates whose utterances
mention slot values verbatim, so a small model can memorize them; they also
include value switches and back-references so the change index has work to do.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

FOODS = ["indian", "chinese", "italian", "thai", "korean"]
AREAS = ["north", "south", "east", "west", "centre"]
PRICES = ["cheap", "moderate", "expensive"]
REQUESTS = ["phone", "address", "postcode", "area", "food", "price range", "name"]
NAMES = ["golden wok", "nirala", "bloomsbury", "saigon city", "anatolia"]

ONTOLOGY = {
    "informable": {
        "food": FOODS,
        "area": AREAS,
        "price range": PRICES,
    },
    "requestable": REQUESTS,
}


def _belief_entries(state: dict[str, str], requests: list[str]) -> list[dict]:
    entries = [
        {"slots": [[slot, value]], "act": "inform"}
        for slot, value in sorted(state.items())
    ]
    entries += [{"slots": [["slot", r]], "act": "request"} for r in requests]
    return entries


def make_woz_dialogue(rng: random.Random, idx: int) -> dict:
    food = rng.choice(FOODS)
    area = rng.choice(AREAS)
    price = rng.choice(PRICES)
    name = rng.choice(NAMES)
    req1, req2 = rng.sample(REQUESTS[:3], 2)

    turns = []
    state: dict[str, str] = {}

    def add_turn(system, user, label, acts, requests=()):
        nonlocal state
        for slot, value in label:
            if slot != "request":
                state[slot] = value
        turns.append({
            "turn_idx": len(turns),
            "system_transcript": system,
            "transcript": user,
            "turn_label": [list(p) for p in label],
            "belief_state": _belief_entries(state, list(requests)),
            "system_acts": acts,
        })

    add_turn(
        "",
        f"i am looking for a {food} restaurant in the {area} part of town",
        [("food", food), ("area", area)],
        [],
    )
    add_turn(
        "what price range are you looking for ?",
        f"i would like something in the {price} price range",
        [("price range", price)],
        ["price range"],
    )
    add_turn(
        f"{name} serves {food} food in the {area} of town",
        f"can i get the {req1} please ?",
        [("request", req1)],
        [["food", food], ["area", area]],
        requests=[req1],
    )
    if rng.random() < 0.5:
        food2 = rng.choice([f for f in FOODS if f != food])
        add_turn(
            f"the {req1} of {name} is available on record",
            f"actually i want {food2} food instead",
            [("food", food2)],
            [[req1, "on record"]],
        )
    if rng.random() < 0.5:
        add_turn(
            "anything else i can help with ?",
            f"yes give me the {req2} too",
            [("request", req2)],
            [],
            requests=[req2],
        )
    add_turn(
        "you are welcome , have a good day",
        "thank you goodbye",
        [],
        [],
    )
    return {"dialogue_idx": idx, "dialogue": turns}


def make_woz_corpus(n_dialogues: int, seed: int) -> list[dict]:
    rng = random.Random(seed)
    return [make_woz_dialogue(rng, i) for i in range(n_dialogues)]


def figure_dialogue_record() -> dict:
    """Back-and-forth reference dialogue: the food slot is set to chinese in
    turn 2 and switched back to indian in turn 5, so at turn 5 the food link
    must point at turn 2."""
    turns = [
        {
            "turn_idx": 0,
            "system_transcript": "",
            "transcript": "i am looking for a restaurant in the north part of town",
            "turn_label": [["area", "north"]],
            "belief_state": [{"slots": [["area", "north"]], "act": "inform"}],
            "system_acts": [],
        },
        {
            "turn_idx": 1,
            "system_transcript": "what kind of food would you like ?",
            "transcript": "do you have indian or chinese options ?",
            "turn_label": [],
            "belief_state": [{"slots": [["area", "north"]], "act": "inform"}],
            "system_acts": ["food"],
        },
        {
            "turn_idx": 2,
            "system_transcript": "nirala serves indian food and golden wok serves chinese food",
            "transcript": "can i get the address of the golden wok ?",
            "turn_label": [["food", "chinese"], ["request", "address"]],
            "belief_state": [
                {"slots": [["area", "north"]], "act": "inform"},
                {"slots": [["food", "chinese"]], "act": "inform"},
                {"slots": [["slot", "address"]], "act": "request"},
            ],
            "system_acts": [["food", "indian"], ["food", "chinese"]],
        },
        {
            "turn_idx": 3,
            "system_transcript": "the address of golden wok is 191 histon road chesterton",
            "transcript": "what is the phone number ?",
            "turn_label": [["request", "phone"]],
            "belief_state": [
                {"slots": [["area", "north"]], "act": "inform"},
                {"slots": [["food", "chinese"]], "act": "inform"},
                {"slots": [["slot", "phone"]], "act": "request"},
            ],
            "system_acts": [["address", "191 histon road chesterton"]],
        },
        {
            "turn_idx": 4,
            "system_transcript": "the phone number is 01223 350688",
            "transcript": "is it in the cheap price range ?",
            "turn_label": [["request", "price range"]],
            "belief_state": [
                {"slots": [["area", "north"]], "act": "inform"},
                {"slots": [["food", "chinese"]], "act": "inform"},
                {"slots": [["slot", "price range"]], "act": "request"},
            ],
            "system_acts": [["phone", "01223 350688"]],
        },
        {
            "turn_idx": 5,
            "system_transcript": "golden wok is in the moderate price range",
            "transcript": "what about nirala ?",
            "turn_label": [["food", "indian"]],
            "belief_state": [
                {"slots": [["area", "north"]], "act": "inform"},
                {"slots": [["food", "indian"]], "act": "inform"},
            ],
            "system_acts": [["price range", "moderate"]],
        },
    ]
    return {"dialogue_idx": "figure", "dialogue": turns}


def write_woz_fixture(
    directory: Path,
    n_train: int = 20,
    n_validation: int = 4,
    n_test: int = 4,
    seed: int = 7,
) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    splits = {
        "woz_train_en.json": make_woz_corpus(n_train, seed),
        "woz_validate_en.json": make_woz_corpus(n_validation, seed + 1),
        "woz_test_en.json": make_woz_corpus(n_test, seed + 2),
    }
    for filename, corpus in splits.items():
        (directory / filename).write_text(json.dumps(corpus, indent=1), encoding="utf-8")
    (directory / "ontology.json").write_text(json.dumps(ONTOLOGY), encoding="utf-8")
    return directory


# --- random label sequences for the change-index oracle -------------------

def random_label_sequences(
    rng: random.Random,
    n_dialogues: int,
    max_turns: int = 20,
    n_slots: int = 3,
    n_values: int = 5,
) -> list[list[list[tuple[str, str]]]]:
    """Per dialogue, a list of per-turn labels over a small slot/value grid."""
    slots = [f"slot{i}" for i in range(n_slots)]
    values = [f"value{i}" for i in range(n_values)]
    sequences = []
    for _ in range(n_dialogues):
        n_turns = rng.randint(1, max_turns)
        dialogue = []
        for _ in range(n_turns):
            label = []
            for slot in slots:
                if rng.random() < 0.4:
                    label.append((slot, rng.choice(values)))
            rng.shuffle(label)
            dialogue.append(label)
        sequences.append(dialogue)
    return sequences
