"""Training objectives: sequence NLL, coreference alignment, flow focus.

All three return scalar tensors attached to the autograd graph.  Probabilities
are clamped at 1e-12 before logs.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from ..model.config import ModelConfig
from ..model.indexing import CorefSupervision, IndexedExample
from ..model.network import StepAttention

PROB_FLOOR = 1e-12


class CorefContractError(Exception):
    """A coreference annotation was supplied for an example without history."""


@dataclass
class LossBreakdown:
    nll: torch.Tensor
    coref: torch.Tensor
    flow: torch.Tensor
    total: torch.Tensor

    def floats(self) -> dict:
        return {
            "nll": float(self.nll.detach()),
            "coref": float(self.coref.detach()),
            "flow": float(self.flow.detach()),
            "total": float(self.total.detach()),
        }


def nll_loss(distributions: torch.Tensor, target_ids: list[int]) -> torch.Tensor:
    """Mean negative log-probability of the target id at each step."""
    if len(distributions) != len(target_ids):
        raise ValueError(
            f"{len(distributions)} distributions vs {len(target_ids)} targets"
        )
    idx = torch.tensor(target_ids, dtype=torch.long, device=distributions.device)
    probs = distributions.gather(1, idx.unsqueeze(1)).squeeze(1)
    return -(probs.clamp_min(PROB_FLOOR).log()).mean()


def coref_loss(
    attentions: list[StepAttention],
    distributions: torch.Tensor,
    supervision: CorefSupervision,
    attention_weight: float,
    output_weight: float,
) -> torch.Tensor:
    """Supervise the pronoun's decoding step: reward conversation-attention
    mass on the mention tokens (normalized over conversation attention only)
    and the output probability of the pronoun, scaled by the resolver's
    confidence."""
    att = attentions[supervision.step]
    if att.beta.numel() == 0:
        raise CorefContractError(
            "coreference supervision requires a non-empty conversation history"
        )
    beta_total = att.beta.sum().clamp_min(PROB_FLOOR)
    mention = torch.tensor(
        supervision.mention_positions, dtype=torch.long, device=att.beta.device
    )
    ratio = att.beta[mention].sum().clamp_min(PROB_FLOOR) / beta_total
    p_pronoun = distributions[supervision.step][supervision.pronoun_id].clamp_min(PROB_FLOOR)
    inner = attention_weight * ratio.log() + output_weight * p_pronoun.log()
    return -inner * supervision.confidence


def flow_loss(
    attentions: list[StepAttention],
    ces_mask: list[bool],
    hes_mask: list[bool],
    evidence_weight: float,
    history_penalty: float,
    per_step: bool = False,
) -> torch.Tensor:
    """Logarithmic reward for passage-attention mass on current evidence
    sentences, linear penalty for mass on history evidence sentences.

    By default passage attention is averaged over decoding steps before the
    ratios are taken; ``per_step`` applies the loss at every step and averages
    the losses instead.
    """
    if not any(ces_mask):
        raise ValueError("flow loss requires at least one current-evidence token")
    alphas = torch.stack([a.alpha for a in attentions])  # (T, m)
    device = alphas.device
    ces = torch.tensor(ces_mask, dtype=alphas.dtype, device=device)
    hes = torch.tensor(hes_mask, dtype=alphas.dtype, device=device)

    def one(alpha: torch.Tensor) -> torch.Tensor:
        total = alpha.sum().clamp_min(PROB_FLOOR)
        ces_ratio = (alpha * ces).sum().clamp_min(PROB_FLOOR) / total
        hes_ratio = (alpha * hes).sum() / total
        return -evidence_weight * ces_ratio.log() + history_penalty * hes_ratio

    if per_step:
        return torch.stack([one(alphas[t]) for t in range(alphas.shape[0])]).mean()
    return one(alphas.mean(dim=0))


def joint_loss(
    distributions: torch.Tensor,
    attentions: list[StepAttention],
    example: IndexedExample,
    config: ModelConfig,
    diagnostics: dict | None = None,
) -> LossBreakdown:
    """NLL plus coreference and flow terms; missing annotations contribute 0."""
    nll = nll_loss(distributions, example.target_out_ids)
    zero = torch.zeros((), dtype=nll.dtype, device=nll.device)

    coref = zero
    if example.coref is not None:
        coref = coref_loss(
            attentions,
            distributions,
            example.coref,
            config.coref_attention_weight,
            config.coref_output_weight,
        )

    flow = zero
    if any(example.ces_token_mask):
        flow = flow_loss(
            attentions,
            example.ces_token_mask,
            example.hes_token_mask,
            config.flow_evidence_weight,
            config.flow_history_penalty,
            per_step=config.flow_per_step,
        )
    elif diagnostics is not None:
        diagnostics["flow_skipped_no_ces"] = diagnostics.get("flow_skipped_no_ces", 0) + 1

    return LossBreakdown(nll=nll, coref=coref, flow=flow, total=nll + coref + flow)
