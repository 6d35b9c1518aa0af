"""End-to-end training: per-candidate binary cross-entropy, Adam at a
constant initial rate, and early stopping on validation joint goal accuracy.

The slot-change index seen during training is built from gold labels
(teacher forcing); evaluation always rebuilds it from predicted labels, so
the validation metric measures the honest inference path.
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import Tensor

from .embeddings import EmbeddingTable
from .evaluation import evaluate_corpus
from .features import Featurizer
from .model import Checkpoint, ModelConfig, StateTracker
from .state import gold_change_indices
from .types import Dialogue, Ontology, REQUEST_SLOT

PROB_FLOOR = 1e-7


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; message names the offending batch."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 50
    max_epochs: int = 100
    dropout_rate: float = 0.2
    seed: int = 0
    patience: int = 20
    selection_metric: str = "joint_goal"
    variant: str = "global_only"
    referential_context: bool = True
    fusion_scorer: bool = True
    per_slot_combination: bool = False
    hidden_per_direction: int = 200
    grad_clip: float = 5.0
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.selection_metric != "joint_goal":
            raise ValueError("only joint_goal selection is supported")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def model_config(self, embedding_dim: int, slot_names: tuple[str, ...]) -> ModelConfig:
        return ModelConfig(
            embedding_dim=embedding_dim,
            hidden_per_direction=self.hidden_per_direction,
            variant=self.variant,
            referential_context=self.referential_context,
            fusion_scorer=self.fusion_scorer,
            per_slot_combination=self.per_slot_combination,
            dropout_rate=self.dropout_rate,
            slot_names=slot_names,
        )


def candidate_loss(probabilities: Tensor, gold_labels: Tensor) -> Tensor:
    """Mean binary cross-entropy over candidates, with the probabilities
    clamped away from {0, 1} before the logarithm."""
    if probabilities.shape != gold_labels.shape:
        raise ValueError(
            f"shape mismatch: {tuple(probabilities.shape)} probabilities vs "
            f"{tuple(gold_labels.shape)} labels"
        )
    p = probabilities.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
    g = gold_labels.to(p.dtype)
    return -(g * torch.log(p) + (1.0 - g) * torch.log(1.0 - p)).mean()


@dataclass
class _Example:
    dialogue: Dialogue
    turn_pos: int
    index_pos: int  # position into the dialogue's teacher-forced indices


def _gold_targets(
    turns, slot: str, values: tuple[str, ...], dtype: torch.dtype
) -> Tensor:
    target = torch.zeros(len(turns), len(values), dtype=dtype)
    value_pos = {v: i for i, v in enumerate(values)}
    for row, turn in enumerate(turns):
        for s, v in turn.turn_label:
            if s == slot and v in value_pos:
                target[row, value_pos[v]] = 1.0
    return target


def fit(
    config: TrainConfig,
    train: list[Dialogue],
    validation: list[Dialogue],
    ontology: Ontology,
    table: EmbeddingTable,
    log_path: str | Path | None = None,
) -> Checkpoint:
    """Train a tracker and return the checkpoint of the best validation epoch.

    Appends one JSON record per epoch to ``log_path`` when given:
    epoch, mean train loss, and the validation metrics.
    """
    if not train:
        raise ValueError("empty training corpus")
    if not validation:
        raise ValueError("empty validation corpus")
    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)

    model = StateTracker(config.model_config(table.width, ontology.slots))
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    featurizer = Featurizer(table, ontology)

    examples = []
    indices_by_dialogue = {}
    for dialogue in train:
        indices_by_dialogue[dialogue.dialogue_id] = gold_change_indices(dialogue)
        for pos in range(len(dialogue.turns)):
            examples.append(_Example(dialogue, pos, pos))

    log_file = open(log_path, "a", encoding="utf-8") if log_path else None
    best_state = None
    best_metric = float("-inf")
    best_epoch = -1
    best_metrics: dict = {}
    try:
        for epoch in range(config.max_epochs):
            model.train()
            rng.shuffle(examples)
            losses = []
            for batch_no in range(0, len(examples), config.batch_size):
                batch = examples[batch_no : batch_no + config.batch_size]
                features = [
                    featurizer.turn_features(
                        ex.dialogue,
                        ex.dialogue.turns[ex.turn_pos],
                        indices_by_dialogue[ex.dialogue.dialogue_id][ex.index_pos],
                    )
                    for ex in batch
                ]
                turns = [ex.dialogue.turns[ex.turn_pos] for ex in batch]
                probs = []
                targets = []
                for slot in ontology.slots:
                    summaries = model.encode_values(slot, featurizer.value_matrices(slot))
                    probs.append(
                        model.score_slot_batch(features, slot, summaries).reshape(-1)
                    )
                    targets.append(
                        _gold_targets(turns, slot, ontology.values(slot), model.dtype)
                        .reshape(-1)
                    )
                loss = candidate_loss(torch.cat(probs), torch.cat(targets))
                if not torch.isfinite(loss):
                    raise TrainingDiverged(
                        f"non-finite loss in epoch {epoch}, "
                        f"batch {batch_no // config.batch_size}"
                    )
                optimizer.zero_grad()
                loss.backward()
                torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
                optimizer.step()
                losses.append(float(loss))

            checkpoint = Checkpoint(
                model=model, config=model.config, ontology=ontology, table=table
            )
            report = evaluate_corpus(checkpoint, validation, config.threshold)
            mean_loss = sum(losses) / len(losses)
            record = {
                "epoch": epoch,
                "loss": mean_loss,
                "validation_joint_goal": report.joint_goal_accuracy,
                "validation_request": report.turn_request_accuracy,
                "validation_inform": report.turn_inform_accuracy,
            }
            if log_file:
                log_file.write(json.dumps(record) + "\n")
                log_file.flush()
            if report.joint_goal_accuracy > best_metric:
                best_metric = report.joint_goal_accuracy
                best_epoch = epoch
                best_state = copy.deepcopy(model.state_dict())
                best_metrics = {
                    "joint_goal_accuracy": report.joint_goal_accuracy,
                    "turn_request_accuracy": report.turn_request_accuracy,
                    "turn_inform_accuracy": report.turn_inform_accuracy,
                    "loss": mean_loss,
                }
            elif epoch - best_epoch >= config.patience:
                break
    finally:
        if log_file:
            log_file.close()

    model.load_state_dict(best_state)
    model.eval()
    return Checkpoint(
        model=model,
        config=model.config,
        ontology=ontology,
        table=table,
        epoch=best_epoch,
        metrics=best_metrics,
        train_config=config.to_dict(),
    )
