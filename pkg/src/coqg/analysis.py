"""Conversation-flow statistics: where each stretch of a conversation looks
inside the passage.

Turns and passage tokens are split into ``num_chunks`` uniform chunks; each
cell (r, c) of the heatmap is the fraction of rationale tokens of turn-chunk
r that fall into passage-chunk c, averaged over the conversations that have
rationale mass in turn-chunk r.  Rows with mass sum to 1.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .corpus.examples import assign_chunks
from .corpus.tokenizer import char_span_to_token_span, tokenize_with_offsets
from .corpus.types import RawConversation


def flow_heatmap(
    conversations: list[RawConversation], num_chunks: int = 10
) -> np.ndarray:
    """(num_chunks, num_chunks) row-stochastic matrix of rationale mass."""
    acc = np.zeros((num_chunks, num_chunks))
    row_counts = np.zeros(num_chunks)
    for conv in conversations:
        offsets = tokenize_with_offsets(conv.passage_text)
        if not offsets:
            continue
        chunk_of_token = assign_chunks(len(offsets), num_chunks)
        turns = conv.turns
        if not turns:
            continue
        turn_chunks = assign_chunks(len(turns), num_chunks)
        local = np.zeros((num_chunks, num_chunks))
        for turn_pos, turn in enumerate(turns):
            if turn.rationale is None:
                continue
            span = char_span_to_token_span(turn.rationale[0], turn.rationale[1], offsets)
            if span is None:
                continue
            r = turn_chunks[turn_pos]
            for tok in range(span[0], span[1] + 1):
                local[r, chunk_of_token[tok]] += 1.0
        row_mass = local.sum(axis=1)
        for r in range(num_chunks):
            if row_mass[r] > 0:
                acc[r] += local[r] / row_mass[r]
                row_counts[r] += 1
    heatmap = np.zeros((num_chunks, num_chunks))
    for r in range(num_chunks):
        if row_counts[r] > 0:
            heatmap[r] = acc[r] / row_counts[r]
    return heatmap


def mean_passage_chunk(heatmap: np.ndarray) -> list[float]:
    """Expected passage-chunk index per turn-chunk (NaN for empty rows)."""
    out = []
    idx = np.arange(heatmap.shape[1])
    for row in heatmap:
        mass = row.sum()
        out.append(float((row * idx).sum() / mass) if mass > 0 else float("nan"))
    return out


def flow_summary(heatmap: np.ndarray) -> dict:
    """Spearman correlation between turn-chunk index and mean passage-chunk
    index, plus the per-row means."""
    means = mean_passage_chunk(heatmap)
    pairs = [(r, m) for r, m in enumerate(means) if not np.isnan(m)]
    if len(pairs) >= 2:
        rho, pvalue = stats.spearmanr([p[0] for p in pairs], [p[1] for p in pairs])
        rho = float(rho)
        pvalue = float(pvalue)
    else:
        rho = float("nan")
        pvalue = float("nan")
    return {
        "mean_passage_chunk": means,
        "spearman_rho": rho,
        "spearman_pvalue": pvalue,
        "num_turn_chunks": int(heatmap.shape[0]),
    }


def heatmap_csv(heatmap: np.ndarray) -> str:
    lines = []
    for row in heatmap:
        lines.append(",".join(f"{v:.6f}" for v in row))
    return "\n".join(lines) + "\n"
