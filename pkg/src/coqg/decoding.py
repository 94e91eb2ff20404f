"""Beam-search generation with unigram repetition blocking.

Hypotheses end at the stop symbol or at ``max_len`` emitted tokens; the
returned hypothesis maximizes length-normalized (average per-token) log
probability among stop-terminated candidates, falling back to the best
truncated one (flagged) when nothing terminated.  Emitted UNKs are replaced
by the highest-attention source token of that step before blocking applies,
so outputs never contain the UNK symbol while a source token exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch

from .corpus.vocab import BOS_ID, EOS_ID, PAD_ID, UNK_ID, Vocabulary
from .model.indexing import IndexedExample
from .model.network import QuestionGenerator, StepAttention

DEFAULT_BEAM_SIZE = 5
DEFAULT_MAX_LEN = 15


@dataclass
class Hypothesis:
    token_ids: list[int]  # emitted tokens as extended-vocabulary ids, stop symbol excluded
    log_prob: float
    steps: int  # emissions including the stop symbol
    state: tuple[torch.Tensor, torch.Tensor] | None
    attention: list[StepAttention]
    finished: bool = False

    def score(self) -> float:
        return self.log_prob / max(self.steps, 1)


@dataclass
class GenerationResult:
    tokens: list[str]
    token_ids: list[int]
    score: float
    attention: list[StepAttention]
    finished: bool
    conversation_id: str = ""
    turn_number: int = 0
    # (tokens, score, finished) of every terminal hypothesis, populated only
    # when beam_search(..., return_all=True)
    candidates: list[tuple[list[str], float, bool]] = field(default_factory=list)


def _base_id(ext_id: int, vocab_size: int) -> int:
    return ext_id if ext_id < vocab_size else UNK_ID


def _expand(
    model: QuestionGenerator,
    hyp: Hypothesis,
    enc,
    src_ids: torch.Tensor,
    ext_size: int,
    pool: int,
    block_unigrams: bool,
) -> list[Hypothesis]:
    """Score one step of continuations for ``hyp``; stop-symbol candidates
    come back marked finished."""
    vocab_size = model.config.vocab_size
    prev = BOS_ID if not hyp.token_ids else _base_id(hyp.token_ids[-1], vocab_size)
    state, att, dist = model.decode_step(prev, hyp.state, enc, src_ids, ext_size)
    log_probs = dist.clamp_min(1e-12).log()
    log_probs[PAD_ID] = -math.inf
    log_probs[BOS_ID] = -math.inf

    replacement = None
    if src_ids.numel() > 0:
        weights = torch.cat([att.alpha, att.beta])
        replacement = int(src_ids[int(weights.argmax())])

    k = min(pool, ext_size)
    top = torch.topk(log_probs, k)
    att = att.detached()
    out = []
    seen: set[int] = set()
    for lp, tid in zip(top.values.tolist(), top.indices.tolist()):
        if lp == -math.inf:
            continue
        if tid == UNK_ID:
            if replacement is None:
                continue
            tid = replacement
        if tid == EOS_ID:
            out.append(
                Hypothesis(
                    token_ids=list(hyp.token_ids),
                    log_prob=hyp.log_prob + lp,
                    steps=hyp.steps + 1,
                    state=None,
                    attention=hyp.attention + [att],
                    finished=True,
                )
            )
            continue
        if tid in seen:
            continue
        if block_unigrams and tid in hyp.token_ids:
            continue
        seen.add(tid)
        out.append(
            Hypothesis(
                token_ids=hyp.token_ids + [tid],
                log_prob=hyp.log_prob + lp,
                steps=hyp.steps + 1,
                state=state,
                attention=hyp.attention + [att],
            )
        )
    return out


def _result(
    hyp: Hypothesis, example: IndexedExample, vocab: Vocabulary, finished: bool
) -> GenerationResult:
    return GenerationResult(
        tokens=[example.extended_token(t, vocab) for t in hyp.token_ids],
        token_ids=list(hyp.token_ids),
        score=hyp.score(),
        attention=hyp.attention,
        finished=finished,
        conversation_id=example.conversation_id,
        turn_number=example.turn_number,
    )


def beam_search(
    model: QuestionGenerator,
    vocab: Vocabulary,
    example: IndexedExample,
    beam_size: int = DEFAULT_BEAM_SIZE,
    max_len: int = DEFAULT_MAX_LEN,
    block_unigrams: bool = True,
    return_all: bool = False,
) -> GenerationResult:
    if len(vocab) != model.config.vocab_size:
        raise ValueError("model and vocabulary disagree on vocabulary size")
    model.eval()
    with torch.no_grad():
        enc = model.encode(example)
        src_ids = model.source_ext_ids(example)
        ext_size = model.extended_size(example)
        live = [
            Hypothesis(
                token_ids=[],
                log_prob=0.0,
                steps=0,
                state=model.init_decoder(enc),
                attention=[],
            )
        ]
        finished: list[Hypothesis] = []
        truncated: list[Hypothesis] = []
        for _ in range(max_len):
            candidates = []
            for hyp in live:
                pool = beam_size + len(hyp.token_ids) + 4
                candidates.extend(
                    _expand(model, hyp, enc, src_ids, ext_size, pool, block_unigrams)
                )
            if not candidates:
                break
            candidates.sort(key=lambda h: h.log_prob, reverse=True)
            selected = candidates[:beam_size]
            live = []
            for hyp in selected:
                (finished if hyp.finished else live).append(hyp)
            if not live:
                break
        truncated.extend(live)

    if finished:
        best = max(finished, key=lambda h: h.score())
        result = _result(best, example, vocab, finished=True)
    else:
        best = max(truncated, key=lambda h: h.score())
        result = _result(best, example, vocab, finished=False)
    if return_all:
        result.candidates = [
            ([example.extended_token(t, vocab) for t in h.token_ids], h.score(), h.finished)
            for h in finished + truncated
        ]
    return result


def greedy_decode(
    model: QuestionGenerator,
    vocab: Vocabulary,
    example: IndexedExample,
    max_len: int = DEFAULT_MAX_LEN,
    block_unigrams: bool = True,
) -> GenerationResult:
    """Independent argmax decoder with the same constraints as beam search."""
    if len(vocab) != model.config.vocab_size:
        raise ValueError("model and vocabulary disagree on vocabulary size")
    model.eval()
    with torch.no_grad():
        enc = model.encode(example)
        src_ids = model.source_ext_ids(example)
        ext_size = model.extended_size(example)
        hyp = Hypothesis(
            token_ids=[], log_prob=0.0, steps=0, state=model.init_decoder(enc), attention=[]
        )
        for _ in range(max_len):
            candidates = _expand(model, hyp, enc, src_ids, ext_size, pool=len(hyp.token_ids) + 5, block_unigrams=block_unigrams)
            if not candidates:
                return _result(hyp, example, vocab, finished=False)
            hyp = max(candidates, key=lambda h: h.log_prob)
            if hyp.finished:
                return _result(hyp, example, vocab, finished=True)
    return _result(hyp, example, vocab, finished=False)
