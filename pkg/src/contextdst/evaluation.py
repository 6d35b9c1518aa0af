"""Whole-dialogue inference and corpus metrics.

Tracking processes turns in order, maintaining the accumulated goal state and
the slot-change index from the model's *own* predicted labels (no gold
leakage).  A candidate enters the turn label when its probability strictly
exceeds the threshold; an informable slot keeps only its highest-probability
value, while every request type above threshold is kept.

Metrics: joint goal accuracy (exact accumulated-state match per turn), turn
request accuracy (exact request-set match) and turn inform accuracy (exact
match of the informable turn label).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

from .features import Featurizer
from .model import Checkpoint
from .state import SlotChangeIndex, apply_turn_label, update_change_index
from .types import Dialogue, REQUEST_SLOT


class OntologyMismatchError(ValueError):
    """Checkpoint and corpus were built against different ontologies."""


@dataclass(frozen=True)
class TurnPrediction:
    turn_label: tuple[tuple[str, str], ...]
    goal_state: dict[str, str]
    requests: frozenset[str]


@dataclass(frozen=True)
class MetricsReport:
    joint_goal_accuracy: float
    turn_request_accuracy: float
    turn_inform_accuracy: float
    per_slot_breakdown: dict[str, float]
    n_turns: int

    def to_dict(self) -> dict:
        return {
            "joint_goal_accuracy": self.joint_goal_accuracy,
            "turn_request_accuracy": self.turn_request_accuracy,
            "turn_inform_accuracy": self.turn_inform_accuracy,
            "per_slot_breakdown": dict(sorted(self.per_slot_breakdown.items())),
            "n_turns": self.n_turns,
        }


@dataclass
class _DialogueTrack:
    dialogue: Dialogue
    index: SlotChangeIndex = field(default_factory=SlotChangeIndex.empty)
    state: dict[str, str] = field(default_factory=dict)
    predictions: list[TurnPrediction] = field(default_factory=list)


def track_corpus(
    checkpoint: Checkpoint,
    dialogues: list[Dialogue],
    threshold: float = 0.5,
) -> list[list[TurnPrediction]]:
    """Run inference over many dialogues, batching turns at the same depth."""
    model = checkpoint.model
    ontology = checkpoint.ontology
    model.eval()
    featurizer = Featurizer(checkpoint.table, ontology)
    with torch.no_grad():
        value_summaries = {
            slot: model.encode_values(slot, featurizer.value_matrices(slot))
            for slot in ontology.slots
        }
        tracks = [_DialogueTrack(d) for d in dialogues]
        max_len = max((len(d.turns) for d in dialogues), default=0)
        for depth in range(max_len):
            active = [t for t in tracks if depth < len(t.dialogue.turns)]
            if not active:
                break
            features = [
                featurizer.turn_features(t.dialogue, t.dialogue.turns[depth], t.index)
                for t in active
            ]
            labels: list[list[tuple[str, str]]] = [[] for _ in active]
            requests: list[set[str]] = [set() for _ in active]
            for slot in ontology.slots:
                probs = model.score_slot_batch(features, slot, value_summaries[slot])
                values = ontology.values(slot)
                for i in range(len(active)):
                    above = [
                        (float(p), v) for p, v in zip(probs[i].tolist(), values)
                        if p > threshold
                    ]
                    if not above:
                        continue
                    if slot == REQUEST_SLOT:
                        for _, v in above:
                            labels[i].append((REQUEST_SLOT, v))
                            requests[i].add(v)
                    else:
                        labels[i].append((slot, max(above)[1]))
            for i, track in enumerate(active):
                state_before = track.state
                track.state = apply_turn_label(state_before, labels[i])
                track.index = update_change_index(
                    track.index, depth, state_before, labels[i]
                )
                track.predictions.append(TurnPrediction(
                    turn_label=tuple(labels[i]),
                    goal_state=dict(track.state),
                    requests=frozenset(requests[i]),
                ))
    return [t.predictions for t in tracks]


def track_dialogue(
    checkpoint: Checkpoint, dialogue: Dialogue, threshold: float = 0.5
) -> list[TurnPrediction]:
    return track_corpus(checkpoint, [dialogue], threshold)[0]


def _check_alignment(predictions, gold) -> None:
    if len(predictions) != len(gold):
        raise ValueError(
            f"{len(predictions)} prediction lists vs {len(gold)} dialogues"
        )
    for preds, dialogue in zip(predictions, gold):
        if len(preds) != len(dialogue.turns):
            raise ValueError(
                f"dialogue {dialogue.dialogue_id}: {len(preds)} predictions "
                f"for {len(dialogue.turns)} turns"
            )


def joint_goal_accuracy(
    predictions: list[list[TurnPrediction]], gold: list[Dialogue]
) -> float:
    """Fraction of turns whose full accumulated informable state matches gold."""
    _check_alignment(predictions, gold)
    correct = total = 0
    for preds, dialogue in zip(predictions, gold):
        for pred, turn in zip(preds, dialogue.turns):
            total += 1
            correct += pred.goal_state == turn.belief_state
    if total == 0:
        raise ValueError("no turns to evaluate")
    return correct / total


def turn_request_accuracy(
    predictions: list[list[TurnPrediction]], gold: list[Dialogue]
) -> float:
    _check_alignment(predictions, gold)
    correct = total = 0
    for preds, dialogue in zip(predictions, gold):
        for pred, turn in zip(preds, dialogue.turns):
            total += 1
            correct += pred.requests == turn.request_label()
    if total == 0:
        raise ValueError("no turns to evaluate")
    return correct / total


def turn_inform_accuracy(
    predictions: list[list[TurnPrediction]], gold: list[Dialogue]
) -> float:
    _check_alignment(predictions, gold)
    correct = total = 0
    for preds, dialogue in zip(predictions, gold):
        for pred, turn in zip(preds, dialogue.turns):
            total += 1
            pred_inform = {(s, v) for s, v in pred.turn_label if s != REQUEST_SLOT}
            correct += pred_inform == set(turn.inform_label())
    if total == 0:
        raise ValueError("no turns to evaluate")
    return correct / total


def _per_slot_breakdown(
    predictions, gold, slots: tuple[str, ...]
) -> dict[str, float]:
    hits = {s: 0 for s in slots}
    total = 0
    for preds, dialogue in zip(predictions, gold):
        for pred, turn in zip(preds, dialogue.turns):
            total += 1
            for slot in slots:
                if slot == REQUEST_SLOT:
                    hits[slot] += pred.requests == turn.request_label()
                else:
                    hits[slot] += (
                        pred.goal_state.get(slot) == turn.belief_state.get(slot)
                    )
    return {s: hits[s] / total for s in slots} if total else {}


def evaluate_corpus(
    checkpoint: Checkpoint,
    dialogues: list[Dialogue],
    threshold: float = 0.5,
    corpus_ontology=None,
) -> MetricsReport:
    """Track every dialogue and reduce to the corpus metrics."""
    if corpus_ontology is not None and (
        corpus_ontology.fingerprint() != checkpoint.ontology.fingerprint()
    ):
        raise OntologyMismatchError(
            "corpus ontology does not match the checkpoint's ontology"
        )
    predictions = track_corpus(checkpoint, dialogues, threshold)
    return MetricsReport(
        joint_goal_accuracy=joint_goal_accuracy(predictions, dialogues),
        turn_request_accuracy=turn_request_accuracy(predictions, dialogues),
        turn_inform_accuracy=turn_inform_accuracy(predictions, dialogues),
        per_slot_breakdown=_per_slot_breakdown(
            predictions, dialogues, checkpoint.ontology.slots
        ),
        n_turns=sum(len(d.turns) for d in dialogues),
    )
