"""The full tracker network: evidence encoders plus candidate scorers, with a
batched scoring path for training/evaluation and a single-candidate path that
mirrors it one attention at a time.

Encoder layout follows the variant flags.  With referential context or
utterance fusion enabled, each evidence type gets its own encoder instance
(antecedent utterance, current utterance, previous system utterance, system
acts, slot-values; the value encoder is shared between previous and candidate
values).  The plain baseline shares a single encoder across its three
evidence types, which is what keeps its trainable-parameter count a small
fraction of the full model's.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import Tensor, nn

from .embeddings import EmbeddingTable
from .encoders import EncodedSequence, GleConfig, GleEncoder
from .features import TurnFeatures
from .scorers import (
    CandidateContext,
    FusionScorer,
    ReferentialScorer,
    ScoreBundle,
    ScoreCombiner,
    UtteranceScorer,
    score_candidate,
)
from .types import Ontology

VARIANTS = ("global_only", "full_gle")


@dataclass(frozen=True)
class ModelConfig:
    embedding_dim: int
    hidden_per_direction: int = 200
    variant: str = "global_only"
    referential_context: bool = True
    fusion_scorer: bool = True
    per_slot_combination: bool = False
    dropout_rate: float = 0.2
    slot_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if not self.slot_names:
            raise ValueError("slot_names must not be empty")

    @property
    def use_local(self) -> bool:
        return self.variant == "full_gle"

    @property
    def hidden_dim(self) -> int:
        return 2 * self.hidden_per_direction

    def to_dict(self) -> dict:
        return {
            "embedding_dim": self.embedding_dim,
            "hidden_per_direction": self.hidden_per_direction,
            "variant": self.variant,
            "referential_context": self.referential_context,
            "fusion_scorer": self.fusion_scorer,
            "per_slot_combination": self.per_slot_combination,
            "dropout_rate": self.dropout_rate,
            "slot_names": list(self.slot_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["slot_names"] = tuple(d.get("slot_names", ()))
        return cls(**d)


def _pad_batch(arrays: list[np.ndarray], dtype: torch.dtype) -> tuple[Tensor, list[int], Tensor]:
    lengths = [a.shape[0] for a in arrays]
    width = arrays[0].shape[1]
    batch = torch.zeros(len(arrays), max(lengths), width, dtype=dtype)
    for i, a in enumerate(arrays):
        batch[i, : a.shape[0]] = torch.as_tensor(a, dtype=dtype)
    mask = torch.zeros(len(arrays), max(lengths), dtype=torch.bool)
    for i, n in enumerate(lengths):
        mask[i, :n] = True
    return batch, lengths, mask


def _attend_pairwise(H: Tensor, mask: Tensor, C: Tensor) -> Tensor:
    """Attention of every candidate summary over every batch sequence.

    H [B, n, d], mask [B, n], C [V, d] -> [B, V, d].
    """
    scores = torch.einsum("bnd,vd->bvn", H, C)
    scores = scores.masked_fill(~mask.unsqueeze(1), float("-inf"))
    p = torch.softmax(scores, dim=-1)
    return torch.einsum("bvn,bnd->bvd", p, H)


def _attend_batch(H: Tensor, c: Tensor, mask: Tensor) -> Tensor:
    """Per-item attention: H [B, m, d], c [B, d] -> [B, d]."""
    scores = torch.einsum("bmd,bd->bm", H, c)
    scores = scores.masked_fill(~mask, float("-inf"))
    p = torch.softmax(scores, dim=-1)
    return torch.einsum("bm,bmd->bd", p, H)


class StateTracker(nn.Module):
    """Scores every (slot, value) candidate of a turn against its context."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        gle = GleConfig(
            input_dim=config.embedding_dim,
            hidden_per_direction=config.hidden_per_direction,
            use_local=config.use_local,
            dropout_rate=config.dropout_rate,
            slot_names=config.slot_names,
        )
        separate = config.referential_context or config.fusion_scorer
        self.utterance_encoder = GleEncoder(gle)
        if separate:
            self.act_encoder = GleEncoder(gle)
            self.value_encoder = GleEncoder(gle)
        else:
            self.act_encoder = self.utterance_encoder
            self.value_encoder = self.utterance_encoder
        if config.referential_context:
            self.antecedent_encoder = GleEncoder(gle)
            self.referential = ReferentialScorer(config.hidden_dim)
        if config.fusion_scorer:
            self.system_encoder = GleEncoder(gle)
            self.fusion = FusionScorer(config.hidden_dim)
        else:
            self.utterance_scorer = UtteranceScorer(config.hidden_dim)
        names = []
        if config.referential_context:
            names += ["referential_utterance", "referential_value"]
        names.append("fusion" if config.fusion_scorer else "utterance")
        names.append("acts")
        self.score_names = tuple(names)
        self.combiner = ScoreCombiner(
            len(names), config.slot_names, per_slot=config.per_slot_combination
        )

    @property
    def dtype(self) -> torch.dtype:
        return next(self.parameters()).dtype

    def _encode_batch(
        self, encoder: GleEncoder, arrays: list[np.ndarray], slot: str
    ) -> tuple[Tensor, Tensor, Tensor]:
        batch, lengths, mask = _pad_batch(arrays, self.dtype)
        H, c = encoder(batch, slot=slot, lengths=lengths, mask=mask)
        return H, c, mask

    def encode_values(self, slot: str, value_arrays: list[np.ndarray]) -> Tensor:
        """Summary vectors for every candidate value of a slot: [V, d_h]."""
        _, c, _ = self._encode_batch(self.value_encoder, value_arrays, slot)
        return c

    def score_slot_batch(
        self,
        features: list[TurnFeatures],
        slot: str,
        value_summaries: Tensor,
    ) -> Tensor:
        """Probabilities [B, V] for all candidates of one slot over a batch
        of turn contexts."""
        C = value_summaries
        H_u, c_u, mask_u = self._encode_batch(
            self.utterance_encoder, [f.user for f in features], slot
        )
        scores = []
        if self.config.referential_context:
            H_pu, _, mask_pu = self._encode_batch(
                self.antecedent_encoder, [f.antecedent_user[slot] for f in features], slot
            )
            H_pv, _, mask_pv = self._encode_batch(
                self.value_encoder, [f.antecedent_value[slot] for f in features], slot
            )
            q_u = _attend_pairwise(H_pu, mask_pu, C)
            q_v = _attend_pairwise(H_pv, mask_pv, C)
            scores.append(self.referential.utterance_out(q_u).squeeze(-1))
            scores.append(self.referential.value_out(q_v).squeeze(-1))
        if self.config.fusion_scorer:
            H_s, c_s, mask_s = self._encode_batch(
                self.system_encoder, [f.system for f in features], slot
            )
            alpha = self.fusion.alpha(c_s, c_u)  # [B]
            l_s = _attend_pairwise(H_s, mask_s, C)
            l_u = _attend_pairwise(H_u, mask_u, C)
            fused = alpha[:, None, None] * l_s + (1.0 - alpha[:, None, None]) * l_u
            scores.append(self.fusion.out(fused).squeeze(-1))
        else:
            q = _attend_pairwise(H_u, mask_u, C)
            scores.append(self.utterance_scorer.out(q).squeeze(-1))
        act_counts = [len(f.acts) for f in features]
        flat_acts = [a for f in features for a in f.acts]
        _, act_c, _ = self._encode_batch(self.act_encoder, flat_acts, slot)
        act_stack = torch.zeros(
            len(features), max(act_counts), self.config.hidden_dim, dtype=self.dtype
        )
        act_mask = torch.zeros(len(features), max(act_counts), dtype=torch.bool)
        offset = 0
        for i, count in enumerate(act_counts):
            act_stack[i, :count] = act_c[offset : offset + count]
            act_mask[i, :count] = True
            offset += count
        l_a = _attend_batch(act_stack, c_u, act_mask)  # [B, d]
        scores.append(l_a @ C.T)
        stacked = torch.stack(scores, dim=-1)  # [B, V, n_scores]
        return self.combiner(stacked, slot)

    def score_one(
        self, features: TurnFeatures, slot: str, value_array: np.ndarray
    ) -> ScoreBundle:
        """Single-candidate scoring through the unbatched encoder and scorer
        path; requires the full variant (referential context + fusion)."""
        if not (self.config.referential_context and self.config.fusion_scorer):
            raise ValueError("single-candidate path needs the full scorer set")
        as_t = lambda a: torch.as_tensor(a, dtype=self.dtype)
        ctx = CandidateContext(
            antecedent_user=self.antecedent_encoder(as_t(features.antecedent_user[slot]), slot=slot),
            previous_value=self.value_encoder(as_t(features.antecedent_value[slot]), slot=slot),
            user=self.utterance_encoder(as_t(features.user), slot=slot),
            system=self.system_encoder(as_t(features.system), slot=slot),
            act_summaries=torch.stack(
                [self.act_encoder(as_t(a), slot=slot).summary for a in features.acts]
            ),
            candidate_value=self.value_encoder(as_t(value_array), slot=slot),
        )
        return score_candidate(ctx, self.referential, self.fusion, self.combiner, slot)


def count_parameters(module: nn.Module) -> int:
    """Trainable parameters only; the frozen embedding table lives outside
    the network and is never counted."""
    return sum(p.numel() for p in module.parameters() if p.requires_grad)


@dataclass
class Checkpoint:
    model: StateTracker
    config: ModelConfig
    ontology: Ontology
    table: EmbeddingTable
    epoch: int = 0
    metrics: dict = field(default_factory=dict)
    train_config: dict = field(default_factory=dict)


def save_checkpoint(path: str | Path, checkpoint: Checkpoint) -> None:
    tokens, matrix, word_dim, char_dim = checkpoint.table.to_arrays()
    payload = {
        "format_version": 1,
        "model_config": checkpoint.config.to_dict(),
        "state_dict": checkpoint.model.state_dict(),
        "ontology": checkpoint.ontology.to_dict(),
        "ontology_fingerprint": checkpoint.ontology.fingerprint(),
        "embedding_tokens": tokens,
        "embedding_matrix": torch.from_numpy(matrix.copy()),
        "embedding_word_dim": word_dim,
        "embedding_char_dim": char_dim,
        "epoch": checkpoint.epoch,
        "metrics": dict(checkpoint.metrics),
        "train_config": dict(checkpoint.train_config),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path: str | Path) -> Checkpoint:
    payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    config = ModelConfig.from_dict(payload["model_config"])
    model = StateTracker(config)
    model.load_state_dict(payload["state_dict"])  # validates parameter shapes
    model.eval()
    ontology = Ontology.from_dict(payload["ontology"])
    if ontology.fingerprint() != payload["ontology_fingerprint"]:
        raise ValueError(f"{path}: ontology fingerprint mismatch; corrupt checkpoint")
    table = EmbeddingTable.from_arrays(
        payload["embedding_tokens"],
        payload["embedding_matrix"].numpy(),
        payload["embedding_word_dim"],
        payload["embedding_char_dim"],
    )
    return Checkpoint(
        model=model,
        config=config,
        ontology=ontology,
        table=table,
        epoch=payload.get("epoch", 0),
        metrics=payload.get("metrics", {}),
        train_config=payload.get("train_config", {}),
    )
