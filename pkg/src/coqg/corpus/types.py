"""Data types shared by the preprocessing pipeline.

Conventions:
    * ``answer_span`` and rationale token spans are INCLUSIVE (start, end)
      token-index pairs.
    * ``sentence_boundaries`` are half-open (start, end) token ranges.
    * all tokens are lowercased by the pipeline tokenizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

BIO_BEGIN = "B_ANS"
BIO_INSIDE = "I_ANS"
BIO_OUT = "O"

EVIDENCE_CURRENT = "CES"
EVIDENCE_HISTORY = "HES"
EVIDENCE_NONE = "NONE"

QUESTION_MARKER = "<q>"
ANSWER_MARKER = "<a>"


@dataclass
class Turn:
    """One question/answer exchange of a conversation.

    ``rationale`` is the character span of the supporting passage text
    highlighted for the answer; it is None when the source data carries no
    usable span (e.g. unanswerable turns marked with negative offsets).
    """

    turn_id: int
    question_text: str
    answer_text: str
    rationale: tuple[int, int] | None  # char offsets, end exclusive


@dataclass
class RawConversation:
    id: str
    passage_text: str
    turns: list[Turn]


@dataclass
class CorefAnnotation:
    """Link between a history mention and a pronoun of the target question.

    ``mention_positions`` index into the flattened history token sequence
    (all history turns concatenated in order, markers included).
    ``pronoun_index`` is the pronoun's position inside ``target_question``.
    ``confidence`` is clamped into (0, 1].
    """

    mention_positions: list[int]
    pronoun_index: int
    confidence: float = 1.0

    def clamped(self) -> "CorefAnnotation":
        c = min(max(self.confidence, 1e-6), 1.0)
        return CorefAnnotation(list(self.mention_positions), self.pronoun_index, c)


@dataclass
class ProcessedExample:
    """One fully annotated training/evaluation instance."""

    conversation_id: str
    turn_number: int
    passage_tokens: list[str]
    sentence_boundaries: list[tuple[int, int]]
    answer_span: tuple[int, int]  # inclusive
    bio_tags: list[str]
    chunk_ids: list[int]
    history: list[list[str]]  # each turn rendered "<q> ... <a> ..."
    target_question: list[str]
    evidence: list[str]  # per sentence: CES / HES / NONE
    coref: CorefAnnotation | None = None
    span_f1: float = 1.0
    weak_alignment: bool = False

    def flat_history(self) -> list[str]:
        return [tok for turn in self.history for tok in turn]

    def evidence_token_mask(self, label: str) -> list[bool]:
        mask = [False] * len(self.passage_tokens)
        for (start, end), lab in zip(self.sentence_boundaries, self.evidence):
            if lab == label:
                for i in range(start, end):
                    mask[i] = True
        return mask

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sentence_boundaries"] = [list(r) for r in self.sentence_boundaries]
        d["answer_span"] = list(self.answer_span)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessedExample":
        coref = d.get("coref")
        return cls(
            conversation_id=d["conversation_id"],
            turn_number=int(d["turn_number"]),
            passage_tokens=list(d["passage_tokens"]),
            sentence_boundaries=[tuple(r) for r in d["sentence_boundaries"]],
            answer_span=tuple(d["answer_span"]),
            bio_tags=list(d["bio_tags"]),
            chunk_ids=[int(c) for c in d["chunk_ids"]],
            history=[list(t) for t in d["history"]],
            target_question=list(d["target_question"]),
            evidence=list(d["evidence"]),
            coref=CorefAnnotation(
                mention_positions=list(coref["mention_positions"]),
                pronoun_index=int(coref["pronoun_index"]),
                confidence=float(coref["confidence"]),
            )
            if coref
            else None,
            span_f1=float(d.get("span_f1", 1.0)),
            weak_alignment=bool(d.get("weak_alignment", False)),
        )


@dataclass
class SpanMatch:
    """Result of extractive answer-span location."""

    start: int
    end: int  # inclusive
    f1: float
    weak: bool = False

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def bio_tags_for_span(length: int, span: tuple[int, int]) -> list[str]:
    start, end = span
    tags = [BIO_OUT] * length
    if length == 0:
        return tags
    start = max(0, start)
    end = min(length - 1, end)
    tags[start] = BIO_BEGIN
    for i in range(start + 1, end + 1):
        tags[i] = BIO_INSIDE
    return tags


def span_from_bio_tags(tags: list[str]) -> tuple[int, int] | None:
    """Recover the (unique) inclusive answer span from BIO tags."""
    start = None
    end = None
    for i, t in enumerate(tags):
        if t == BIO_BEGIN:
            start = i
            end = i
        elif t == BIO_INSIDE and start is not None:
            end = i
    if start is None:
        return None
    return (start, end)
