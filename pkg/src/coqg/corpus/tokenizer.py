"""Deterministic whitespace + punctuation tokenizer and sentence splitter.

Tokens are lowercased; punctuation marks become their own tokens.  Offsets
always refer to the original (non-lowercased) text so character-level
rationale spans can be mapped onto token indices.  The tokenizer is kept
dependency-free on purpose; swap :func:`tokenize_with_offsets` to plug in a
different one.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"\w+(?:'\w+)?|[^\w\s]", re.UNICODE)

# Sentence enders followed by whitespace (or end of text).  Abbreviation
# handling is intentionally minimal: "mr." style titles stay glued to the
# next sentence, which is acceptable for evidence labeling at sentence
# granularity.
_SENT_RE = re.compile(r"[^.!?\n]*[.!?]+(?:[\"')\]]+)?(?:\s+|$)|[^.!?\n]+(?:\n+|$)", re.UNICODE)


def tokenize_with_offsets(text: str, lowercase: bool = True) -> list[tuple[str, int, int]]:
    """Return (token, char_start, char_end) triples; char_end is exclusive."""
    out = []
    for m in _TOKEN_RE.finditer(text):
        tok = m.group(0)
        out.append((tok.lower() if lowercase else tok, m.start(), m.end()))
    return out


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    return [t for t, _, _ in tokenize_with_offsets(text, lowercase=lowercase)]


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Character spans (start, end exclusive) of sentences, covering all
    non-whitespace of ``text`` in order."""
    spans = []
    for m in _SENT_RE.finditer(text):
        chunk = m.group(0)
        stripped = chunk.strip()
        if not stripped:
            continue
        start = m.start() + chunk.index(stripped[0])
        spans.append((start, start + len(stripped)))
    return spans


def sentence_token_ranges(
    sentence_spans: list[tuple[int, int]],
    token_offsets: list[tuple[str, int, int]],
) -> list[tuple[int, int]]:
    """Map character sentence spans to half-open token-index ranges.

    Every token lands in exactly one sentence (by its start offset); tokens
    falling outside all sentence spans attach to the nearest preceding
    sentence.
    """
    ranges: list[tuple[int, int]] = []
    if not token_offsets:
        return [(0, 0) for _ in sentence_spans]
    starts = [s for _, s, _ in token_offsets]
    tok_idx = 0
    n_tok = len(starts)
    for si, (cs, ce) in enumerate(sentence_spans):
        begin = tok_idx
        while tok_idx < n_tok and (starts[tok_idx] < ce or si == len(sentence_spans) - 1):
            tok_idx += 1
        ranges.append((begin, tok_idx))
    if tok_idx < n_tok and ranges:
        last_begin, _ = ranges[-1]
        ranges[-1] = (last_begin, n_tok)
    return ranges


def char_span_to_token_span(
    char_start: int,
    char_end: int,
    token_offsets: list[tuple[str, int, int]],
) -> tuple[int, int] | None:
    """Smallest inclusive token span overlapping [char_start, char_end)."""
    first = None
    last = None
    for i, (_, s, e) in enumerate(token_offsets):
        if e > char_start and s < char_end:
            if first is None:
                first = i
            last = i
    if first is None:
        return None
    return first, last
