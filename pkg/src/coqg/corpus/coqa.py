"""Loading and filtering of CoQA-format conversation files.

Expected JSON schema: a top-level ``"data"`` array; each item carries a
``"story"`` string plus parallel ``"questions"`` / ``"answers"`` arrays.
Questions have ``input_text`` and ``turn_id``; answers additionally have
``span_start`` / ``span_end`` / ``span_text`` giving the rationale span
highlighted in the story.  Negative span offsets mean "no usable span".
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .types import RawConversation, Turn


class CorpusError(Exception):
    """Base class for corpus ingestion failures."""


class ParseError(CorpusError):
    pass


class ValidationError(CorpusError):
    pass


# Answers matching these after normalization carry too little content to
# recover the question from; they are dropped as generation targets.
FILTERED_ANSWERS = frozenset({"yes", "no", "unknown"})

_EDGE_PUNCT_RE = re.compile(r"^[^0-9a-z]+|[^0-9a-z]+$")


def normalize_answer(text: str) -> str:
    """Lowercase and strip non-alphanumeric characters from both edges."""
    return _EDGE_PUNCT_RE.sub("", text.strip().lower())


def _validate_conversation(conv: RawConversation, record: str) -> None:
    for pos, turn in enumerate(conv.turns, start=1):
        if turn.turn_id != pos:
            raise ValidationError(
                f"record {record}: turn_ids must be consecutive from 1, "
                f"got {turn.turn_id} at position {pos}"
            )
        if turn.rationale is not None:
            s, e = turn.rationale
            if s < 0 or e > len(conv.passage_text) or s >= e:
                raise ValidationError(
                    f"record {record}: rationale span ({s}, {e}) outside passage "
                    f"bounds [0, {len(conv.passage_text)})"
                )


def conversation_from_record(item: dict, record: str) -> RawConversation:
    try:
        story = item["story"]
        questions = item["questions"]
        answers = item["answers"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"record {record}: missing field {exc}") from exc
    if len(questions) != len(answers):
        raise ValidationError(
            f"record {record}: {len(questions)} questions vs {len(answers)} answers"
        )
    turns = []
    for q, a in zip(questions, answers):
        if q.get("turn_id") != a.get("turn_id"):
            raise ValidationError(
                f"record {record}: question turn_id {q.get('turn_id')} does not "
                f"match answer turn_id {a.get('turn_id')}"
            )
        span_start = a.get("span_start", -1)
        span_end = a.get("span_end", -1)
        rationale = None
        if isinstance(span_start, int) and isinstance(span_end, int):
            if span_start >= 0 and span_end > span_start:
                rationale = (span_start, span_end)
        turns.append(
            Turn(
                turn_id=int(q["turn_id"]),
                question_text=str(q.get("input_text", "")),
                answer_text=str(a.get("input_text", "")),
                rationale=rationale,
            )
        )
    conv = RawConversation(id=str(item.get("id", record)), passage_text=story, turns=turns)
    _validate_conversation(conv, record)
    return conv


def load_coqa(path: str | Path) -> list[RawConversation]:
    """Load every conversation of a CoQA-format JSON file."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    data = raw.get("data") if isinstance(raw, dict) else None
    if data is None:
        raise ParseError(f"{path}: expected a top-level 'data' array")
    conversations = []
    for i, item in enumerate(data):
        record = str(item.get("id", f"{path.name}#{i}")) if isinstance(item, dict) else f"{path.name}#{i}"
        conversations.append(conversation_from_record(item, record))
    return conversations


def is_filtered_turn(turn: Turn) -> bool:
    return normalize_answer(turn.answer_text) in FILTERED_ANSWERS


def filter_turns(conv: RawConversation) -> RawConversation:
    """Drop yes/no/unknown-answer turns as generation targets.

    Turn ids are preserved, so later turns still see the dropped ones when
    history windows are assembled from the unfiltered conversation.
    """
    kept = [t for t in conv.turns if not is_filtered_turn(t)]
    return RawConversation(id=conv.id, passage_text=conv.passage_text, turns=kept)
