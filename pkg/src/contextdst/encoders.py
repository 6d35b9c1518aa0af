"""Sequence encoders: a bidirectional LSTM over token embeddings followed by
a learned self-attention summary, optionally mixed with slot-specific local
recurrences through a per-slot sigmoid gate.

Every encoder maps an [n x d_in] embedded sequence to hidden states
H [n x d_h] and a summary vector c [d_h], with d_h = 2 * hidden size per
direction.  Batched inputs use packed sequences so padding never leaks into
the backward recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import torch
from torch import Tensor, nn


class EncodedSequence(NamedTuple):
    hidden: Tensor   # [n, d_h] or [B, n, d_h]
    summary: Tensor  # [d_h] or [B, d_h]


@dataclass(frozen=True)
class GleConfig:
    input_dim: int
    hidden_per_direction: int = 200
    use_local: bool = False
    dropout_rate: float = 0.2
    slot_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.hidden_per_direction <= 0:
            raise ValueError("hidden_per_direction must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.use_local and not self.slot_names:
            raise ValueError("local encoders need slot_names")

    @property
    def hidden_dim(self) -> int:
        return 2 * self.hidden_per_direction


def self_attention_summary(H: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Score each row with a learned linear map, softmax, weighted-sum.

    Pure form of the attention the :class:`SelfAttention` module applies;
    ``weight`` is [d_h], ``bias`` a scalar.
    """
    scores = H @ weight + bias
    p = torch.softmax(scores, dim=-1)
    return p @ H


def init_linear(linear: nn.Linear) -> None:
    bound = 1.0 / math.sqrt(linear.in_features)
    nn.init.uniform_(linear.weight, -bound, bound)
    if linear.bias is not None:
        nn.init.zeros_(linear.bias)


def init_lstm(lstm: nn.LSTM) -> None:
    """Uniform(+-1/sqrt(fanin)) weights, zero biases, forget-gate bias 1."""
    hidden = lstm.hidden_size
    for name, param in lstm.named_parameters():
        if name.startswith("weight_ih"):
            nn.init.uniform_(param, -1.0 / math.sqrt(lstm.input_size),
                             1.0 / math.sqrt(lstm.input_size))
        elif name.startswith("weight_hh"):
            nn.init.uniform_(param, -1.0 / math.sqrt(hidden), 1.0 / math.sqrt(hidden))
        elif name.startswith("bias"):
            nn.init.zeros_(param)
            if name.startswith("bias_ih"):
                param.data[hidden:2 * hidden] = 1.0


class SelfAttention(nn.Module):
    """Summary vector c = sum_i softmax(w . H_i + b)_i H_i."""

    def __init__(self, dim: int):
        super().__init__()
        self.scorer = nn.Linear(dim, 1)
        init_linear(self.scorer)

    def forward(self, H: Tensor, mask: Tensor | None = None) -> Tensor:
        scores = self.scorer(H).squeeze(-1)
        if mask is not None:
            scores = scores.masked_fill(~mask, float("-inf"))
        p = torch.softmax(scores, dim=-1)
        return torch.einsum("...n,...nd->...d", p, H)


def _run_lstm(lstm: nn.LSTM, x: Tensor, lengths: list[int] | None) -> Tensor:
    if lengths is None:
        out, _ = lstm(x)
        return out
    packed = nn.utils.rnn.pack_padded_sequence(
        x, lengths, batch_first=True, enforce_sorted=False
    )
    out, _ = lstm(packed)
    padded, _ = nn.utils.rnn.pad_packed_sequence(
        out, batch_first=True, total_length=x.shape[1]
    )
    return padded


class GleEncoder(nn.Module):
    """Global (optionally plus slot-local) self-attentive sequence encoder.

    With ``use_local`` the global and slot-specific recurrent outputs are
    mixed by a learned per-slot gate beta in (0, 1):
    H = beta * H_local + (1 - beta) * H_global, and likewise for the two
    attention summaries over the mixed H.  Global-only behaviour is the
    beta = 0 special case with no local parameters at all.
    """

    def __init__(self, cfg: GleConfig):
        super().__init__()
        self.cfg = cfg
        self.global_rnn = nn.LSTM(
            cfg.input_dim, cfg.hidden_per_direction,
            bidirectional=True, batch_first=True,
        )
        init_lstm(self.global_rnn)
        self.global_attention = SelfAttention(cfg.hidden_dim)
        if cfg.use_local:
            self.local_rnns = nn.ModuleDict()
            self.local_attentions = nn.ModuleDict()
            for slot in cfg.slot_names:
                rnn = nn.LSTM(cfg.input_dim, cfg.hidden_per_direction,
                              bidirectional=True, batch_first=True)
                init_lstm(rnn)
                self.local_rnns[slot] = rnn
                self.local_attentions[slot] = SelfAttention(cfg.hidden_dim)
            self.beta_raw = nn.Parameter(torch.zeros(len(cfg.slot_names)))

    def beta(self, slot: str) -> Tensor:
        return torch.sigmoid(self.beta_raw[self.cfg.slot_names.index(slot)])

    def forward(
        self,
        x: Tensor,
        slot: str | None = None,
        lengths: list[int] | None = None,
        mask: Tensor | None = None,
    ) -> EncodedSequence:
        """Encode [n, d_in] (single) or [B, n, d_in] (padded batch) input."""
        single = x.dim() == 2
        if single:
            if x.shape[0] == 0:
                raise ValueError("empty sequence; embed the sentinel row instead")
            x = x.unsqueeze(0)
        elif x.shape[1] == 0:
            raise ValueError("empty sequence; embed the sentinel row instead")
        drop = self.cfg.dropout_rate
        x = nn.functional.dropout(x, drop, self.training)
        H = nn.functional.dropout(_run_lstm(self.global_rnn, x, lengths), drop, self.training)
        if self.cfg.use_local:
            if slot is None:
                raise ValueError("slot is required when local encoders are enabled")
            local = nn.functional.dropout(
                _run_lstm(self.local_rnns[slot], x, lengths), drop, self.training
            )
            b = self.beta(slot)
            H = b * local + (1.0 - b) * H
            c = b * self.local_attentions[slot](H, mask) \
                + (1.0 - b) * self.global_attention(H, mask)
        else:
            c = self.global_attention(H, mask)
        if single:
            return EncodedSequence(H.squeeze(0), c.squeeze(0))
        return EncodedSequence(H, c)
