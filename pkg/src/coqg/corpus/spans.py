"""Extractive answer-span location by token-level F1.

The free-form answer is matched against contiguous passage spans; the span
with maximal token F1 wins.  Search runs inside the rationale's sentence(s)
first and widens to the whole passage only when nothing there overlaps the
answer at all.  Ties break toward shorter spans, then earlier starts.
"""

from __future__ import annotations

from collections import Counter

from .types import SpanMatch


def token_f1(span_tokens: list[str], answer_tokens: list[str]) -> float:
    """Multiset-overlap F1 between a candidate span and the answer."""
    if not span_tokens or not answer_tokens:
        return 0.0
    overlap = sum((Counter(span_tokens) & Counter(answer_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(span_tokens)
    recall = overlap / len(answer_tokens)
    return 2.0 * precision * recall / (precision + recall)


def _best_span_in_window(
    passage_tokens: list[str],
    answer_tokens: list[str],
    lo: int,
    hi: int,
) -> tuple[tuple[int, int] | None, float]:
    """Best-F1 inclusive span within [lo, hi]; ties: shorter, then earlier.

    Only spans starting and ending on answer tokens can be optimal: trimming
    a non-matching edge token raises precision without losing recall.
    """
    answer_set = set(answer_tokens)
    anchors = [i for i in range(lo, hi + 1) if passage_tokens[i] in answer_set]
    best_span = None
    best_key = None  # (f1, -length, -start): lexicographic max
    for s in anchors:
        for e in anchors:
            if e < s:
                continue
            f1 = token_f1(passage_tokens[s : e + 1], answer_tokens)
            if f1 <= 0.0:
                continue
            key = (f1, -(e - s + 1), -s)
            if best_key is None or key > best_key:
                best_key = key
                best_span = (s, e)
    return best_span, (best_key[0] if best_key else 0.0)


def locate_answer_span(
    passage_tokens: list[str],
    answer_tokens: list[str],
    rationale_hint: tuple[int, int] | None = None,
) -> SpanMatch:
    """Locate the extractive span that best matches the answer.

    ``rationale_hint`` is an inclusive token range to search first (typically
    the sentence containing the highlighted rationale).  If no overlapping
    span exists anywhere, the hint itself is returned flagged as weakly
    aligned (or span (0, 0) when there is no hint).
    """
    if not passage_tokens:
        raise ValueError("passage must be non-empty")
    m = len(passage_tokens)
    if rationale_hint is not None:
        lo = max(0, rationale_hint[0])
        hi = min(m - 1, rationale_hint[1])
        span, f1 = _best_span_in_window(passage_tokens, answer_tokens, lo, hi)
        if span is not None and f1 > 0.0:
            return SpanMatch(span[0], span[1], f1)
    span, f1 = _best_span_in_window(passage_tokens, answer_tokens, 0, m - 1)
    if span is not None and f1 > 0.0:
        return SpanMatch(span[0], span[1], f1)
    if rationale_hint is not None:
        lo = max(0, rationale_hint[0])
        hi = min(m - 1, rationale_hint[1])
        return SpanMatch(lo, hi, 0.0, weak=True)
    return SpanMatch(0, 0, 0.0, weak=True)
