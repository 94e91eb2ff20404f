"""Assembly of annotated examples from raw conversations.

One example is produced per retained target turn.  History windows and
evidence labels are computed from the *unfiltered* conversation: dropped
yes/no/unknown turns still appear as context and their rationales still mark
history evidence sentences.
"""

from __future__ import annotations

from .coqa import filter_turns
from .spans import locate_answer_span
from .tokenizer import (
    char_span_to_token_span,
    sentence_token_ranges,
    split_sentences,
    tokenize,
    tokenize_with_offsets,
)
from .types import (
    ANSWER_MARKER,
    EVIDENCE_CURRENT,
    EVIDENCE_HISTORY,
    EVIDENCE_NONE,
    QUESTION_MARKER,
    ProcessedExample,
    RawConversation,
    Turn,
    bio_tags_for_span,
)

DEFAULT_HISTORY_TURNS = 3
DEFAULT_NUM_CHUNKS = 10


def assign_chunks(passage_length: int, num_chunks: int) -> list[int]:
    """Uniform chunk id per token: floor(t * L / length)."""
    if num_chunks < 1:
        raise ValueError("num_chunks must be >= 1")
    if passage_length < 1:
        raise ValueError("passage_length must be >= 1")
    return [t * num_chunks // passage_length for t in range(passage_length)]


def render_history_turn(turn: Turn) -> list[str]:
    return (
        [QUESTION_MARKER]
        + tokenize(turn.question_text)
        + [ANSWER_MARKER]
        + tokenize(turn.answer_text)
    )


def _sentences_overlapping(
    token_span: tuple[int, int], sentence_ranges: list[tuple[int, int]]
) -> set[int]:
    """Indices of sentences whose half-open token range meets an inclusive span."""
    s, e = token_span
    hit = set()
    for i, (ss, se) in enumerate(sentence_ranges):
        if ss <= e and s < se:
            hit.add(i)
    return hit


def label_evidence(
    sentence_ranges: list[tuple[int, int]],
    current_span: tuple[int, int] | None,
    history_spans: list[tuple[int, int]],
) -> list[str]:
    """CES for sentences meeting the current rationale, HES for those meeting
    only earlier turns' rationales; CES wins on overlap."""
    labels = [EVIDENCE_NONE] * len(sentence_ranges)
    ces = _sentences_overlapping(current_span, sentence_ranges) if current_span else set()
    hes = set()
    for span in history_spans:
        hes |= _sentences_overlapping(span, sentence_ranges)
    hes -= ces
    for i in ces:
        labels[i] = EVIDENCE_CURRENT
    for i in hes:
        labels[i] = EVIDENCE_HISTORY
    return labels


def build_examples(
    conv: RawConversation,
    n_history: int = DEFAULT_HISTORY_TURNS,
    num_chunks: int = DEFAULT_NUM_CHUNKS,
) -> list[ProcessedExample]:
    """Produce one ProcessedExample per retained target turn of ``conv``."""
    token_offsets = tokenize_with_offsets(conv.passage_text)
    passage_tokens = [t for t, _, _ in token_offsets]
    if not passage_tokens:
        return []
    sent_char_spans = split_sentences(conv.passage_text)
    sentence_ranges = sentence_token_ranges(sent_char_spans, token_offsets)
    chunk_ids = assign_chunks(len(passage_tokens), num_chunks)
    turns_by_id = {t.turn_id: t for t in conv.turns}

    def rationale_token_span(turn: Turn) -> tuple[int, int] | None:
        if turn.rationale is None:
            return None
        return char_span_to_token_span(turn.rationale[0], turn.rationale[1], token_offsets)

    examples = []
    for target in filter_turns(conv).turns:
        i = target.turn_id
        rationale_span = rationale_token_span(target)
        hint = None
        if rationale_span is not None:
            hint_sents = _sentences_overlapping(rationale_span, sentence_ranges)
            if hint_sents:
                lo = min(sentence_ranges[s][0] for s in hint_sents)
                hi = max(sentence_ranges[s][1] for s in hint_sents) - 1
                hint = (lo, hi)
        match = locate_answer_span(passage_tokens, tokenize(target.answer_text), hint)

        history = [
            render_history_turn(turns_by_id[j])
            for j in range(max(1, i - n_history), i)
            if j in turns_by_id
        ]
        history_spans = [
            span
            for j in range(1, i)
            if j in turns_by_id
            for span in [rationale_token_span(turns_by_id[j])]
            if span is not None
        ]
        evidence = label_evidence(sentence_ranges, rationale_span or match.span, history_spans)

        examples.append(
            ProcessedExample(
                conversation_id=conv.id,
                turn_number=i,
                passage_tokens=passage_tokens,
                sentence_boundaries=list(sentence_ranges),
                answer_span=match.span,
                bio_tags=bio_tags_for_span(len(passage_tokens), match.span),
                chunk_ids=chunk_ids,
                history=history,
                target_question=tokenize(target.question_text),
                evidence=evidence,
                coref=None,
                span_f1=match.f1,
                weak_alignment=match.weak,
            )
        )
    return examples
