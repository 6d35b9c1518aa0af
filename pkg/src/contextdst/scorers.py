"""Per-candidate evidence scores and their combination.

Four scores feed the final decision for a (slot, value) candidate:

* ``referential_utterance`` / ``referential_value``: linear maps over the
  candidate-conditioned attention summaries of the antecedent user utterance
  and the previous slot-value,
* ``fusion``: a linear map over the alpha-gated mix of attention summaries of
  the previous system utterance and the current user utterance,
* ``acts``: the dot product between the user-conditioned attention over the
  system-act summaries and the candidate summary.

The combination is a learned weighted sum of the active scores through a
sigmoid.  Pure functions carry the math; the small modules below own the
learnable parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import Tensor, nn

from .encoders import EncodedSequence, init_linear


def attend(H: Tensor, c: Tensor) -> Tensor:
    """Parameter-free conditioned attention: softmax(H c) weighted sum of H's
    rows.  Supports matching leading batch dimensions."""
    scores = torch.einsum("...nd,...d->...n", H, c)
    p = torch.softmax(scores, dim=-1)
    return torch.einsum("...n,...nd->...d", p, H)


def score_referential(
    H_antecedent: Tensor,
    H_previous_value: Tensor,
    c_value: Tensor,
    w_utterance: Tensor,
    b_utterance: Tensor,
    w_value: Tensor,
    b_value: Tensor,
) -> tuple[Tensor, Tensor]:
    y_u = attend(H_antecedent, c_value) @ w_utterance + b_utterance
    y_v = attend(H_previous_value, c_value) @ w_value + b_value
    return y_u, y_v


def gate_alpha(
    c_system: Tensor,
    c_user: Tensor,
    W_in: Tensor,
    b_in: Tensor,
    w_out: Tensor,
    b_out: Tensor,
) -> Tensor:
    """Relevance gate for the previous system utterance:
    alpha = sigmoid(w_out . tanh(W_in [c_s ; c_u] + b_in) + b_out)."""
    f_c = torch.cat([c_system, c_user], dim=-1) @ W_in.T + b_in
    return torch.sigmoid(torch.tanh(f_c) @ w_out + b_out)


def score_fusion(
    H_system: Tensor,
    H_user: Tensor,
    c_value: Tensor,
    alpha: Tensor,
    w: Tensor,
    b: Tensor,
) -> Tensor:
    l_system = attend(H_system, c_value)
    l_user = attend(H_user, c_value)
    fused = alpha * l_system + (1.0 - alpha) * l_user
    return fused @ w + b


def score_acts(act_summaries: Tensor, c_user: Tensor, c_value: Tensor) -> Tensor:
    """No extra parameters: attend over the per-act summaries with the user
    summary, then dot with the candidate summary."""
    l_acts = attend(act_summaries, c_user)
    return torch.einsum("...d,...d->...", l_acts, c_value)


def combine_scores(scores: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """sigmoid(w . scores + b) over the stacked evidence scores."""
    return torch.sigmoid(scores @ w + b)


class ReferentialScorer(nn.Module):
    def __init__(self, dim: int):
        super().__init__()
        self.utterance_out = nn.Linear(dim, 1)
        self.value_out = nn.Linear(dim, 1)
        init_linear(self.utterance_out)
        init_linear(self.value_out)

    def forward(self, H_antecedent, H_previous_value, c_value):
        return score_referential(
            H_antecedent, H_previous_value, c_value,
            self.utterance_out.weight[0], self.utterance_out.bias[0],
            self.value_out.weight[0], self.value_out.bias[0],
        )


class FusionScorer(nn.Module):
    def __init__(self, dim: int):
        super().__init__()
        self.gate_in = nn.Linear(2 * dim, dim)
        self.gate_out = nn.Linear(dim, 1)
        self.out = nn.Linear(dim, 1)
        for lin in (self.gate_in, self.gate_out, self.out):
            init_linear(lin)

    def alpha(self, c_system, c_user):
        return gate_alpha(
            c_system, c_user,
            self.gate_in.weight, self.gate_in.bias,
            self.gate_out.weight[0], self.gate_out.bias[0],
        )

    def forward(self, H_system, H_user, c_value, alpha):
        return score_fusion(
            H_system, H_user, c_value, alpha,
            self.out.weight[0], self.out.bias[0],
        )


class UtteranceScorer(nn.Module):
    """Plain current-utterance score used when the fusion gate is disabled."""

    def __init__(self, dim: int):
        super().__init__()
        self.out = nn.Linear(dim, 1)
        init_linear(self.out)

    def forward(self, H_user, c_value):
        return attend(H_user, c_value) @ self.out.weight[0] + self.out.bias[0]


class ScoreCombiner(nn.Module):
    """Learned weighted sum of the evidence scores through a sigmoid.

    One global weight vector by default; ``per_slot`` switches to a separate
    weight vector per slot for ablations.
    """

    def __init__(self, n_scores: int, slot_names: tuple[str, ...] = (), per_slot: bool = False):
        super().__init__()
        self.n_scores = n_scores
        self.per_slot = per_slot
        if per_slot:
            if not slot_names:
                raise ValueError("per-slot combination needs slot_names")
            self.slot_out = nn.ModuleDict({s: nn.Linear(n_scores, 1) for s in slot_names})
            for lin in self.slot_out.values():
                init_linear(lin)
        else:
            self.out = nn.Linear(n_scores, 1)
            init_linear(self.out)

    def forward(self, scores: Tensor, slot: str | None = None) -> Tensor:
        lin = self.slot_out[slot] if self.per_slot else self.out
        return combine_scores(scores, lin.weight[0], lin.bias[0])


@dataclass(frozen=True)
class CandidateContext:
    """All encoded evidence needed to score one (slot, value) candidate."""

    antecedent_user: EncodedSequence
    previous_value: EncodedSequence
    user: EncodedSequence
    system: EncodedSequence
    act_summaries: Tensor  # [n_acts, d_h], one summary row per system act
    candidate_value: EncodedSequence


@dataclass(frozen=True)
class ScoreBundle:
    referential_utterance: float
    referential_value: float
    fusion: float
    acts: float
    alpha: float
    probability: float


def score_candidate(
    ctx: CandidateContext,
    referential: ReferentialScorer,
    fusion: FusionScorer,
    combiner: ScoreCombiner,
    slot: str | None = None,
) -> ScoreBundle:
    """Full scoring path for a single candidate (all four evidence scores)."""
    c_value = ctx.candidate_value.summary
    y_ref_u, y_ref_v = referential(
        ctx.antecedent_user.hidden, ctx.previous_value.hidden, c_value
    )
    alpha = fusion.alpha(ctx.system.summary, ctx.user.summary)
    y_fusion = fusion(ctx.system.hidden, ctx.user.hidden, c_value, alpha)
    y_acts = score_acts(ctx.act_summaries, ctx.user.summary, c_value)
    probability = combiner(torch.stack([y_ref_u, y_ref_v, y_fusion, y_acts]), slot)
    return ScoreBundle(
        referential_utterance=float(y_ref_u),
        referential_value=float(y_ref_v),
        fusion=float(y_fusion),
        acts=float(y_acts),
        alpha=float(alpha),
        probability=float(probability),
    )
