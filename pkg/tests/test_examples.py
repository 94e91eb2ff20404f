import pytest
from hypothesis import given, strategies as st

from coqg.corpus.coqa import load_coqa
from coqg.corpus.examples import assign_chunks, build_examples, label_evidence
from coqg.corpus.types import (
    RawConversation,
    Turn,
    bio_tags_for_span,
    span_from_bio_tags,
)


def _conv(story, qa, id="t0"):
    """qa: list of (question, answer, rationale char span or None)."""
    turns = [
        Turn(turn_id=i + 1, question_text=q, answer_text=a, rationale=r)
        for i, (q, a, r) in enumerate(qa)
    ]
    return RawConversation(id=id, passage_text=story, turns=turns)


STORY = (
    "President Milton was unable to seek a third term because of term limits. "
    "His deputy Vance won the party's nomination with ease. "
    "Old Senator Hale lost the early primaries."
)
from coqg.corpus.tokenizer import split_sentences

S1, S2, S3 = split_sentences(STORY)


def test_assign_chunks_uniform():
    ids = assign_chunks(100, 10)
    assert ids[0] == 0 and ids[99] == 9
    assert all(ids.count(c) == 10 for c in range(10))


def test_assign_chunks_short_passage():
    assert assign_chunks(5, 10) == [0, 2, 4, 6, 8]


def test_assign_chunks_single():
    assert assign_chunks(7, 1) == [0] * 7


@given(st.integers(min_value=1, max_value=300), st.integers(min_value=1, max_value=20))
def test_assign_chunks_monotone_and_surjective(length, chunks):
    ids = assign_chunks(length, chunks)
    assert len(ids) == length
    assert all(0 <= c < chunks for c in ids)
    assert all(a <= b for a, b in zip(ids, ids[1:]))
    if length >= chunks:
        assert set(ids) == set(range(chunks))


@given(st.integers(min_value=1, max_value=60), st.data())
def test_bio_round_trip(length, data):
    start = data.draw(st.integers(min_value=0, max_value=length - 1))
    end = data.draw(st.integers(min_value=start, max_value=length - 1))
    tags = bio_tags_for_span(length, (start, end))
    assert span_from_bio_tags(tags) == (start, end)


def test_turn_one_has_empty_history():
    conv = _conv(STORY, [("Who was unable to seek a third term?", "Milton", S1)])
    [ex] = build_examples(conv)
    assert ex.history == []
    assert ex.turn_number == 1


def test_history_window_holds_three_previous_turns():
    qa = [(f"q{i}?", f"answer{i}", S1) for i in range(1, 6)]
    conv = _conv(STORY, qa)
    examples = build_examples(conv, n_history=3)
    by_turn = {ex.turn_number: ex for ex in examples}
    ex5 = by_turn[5]
    assert len(ex5.history) == 3
    assert ex5.history[0][:2] == ["<q>", "q2"]
    assert ex5.history[1][:2] == ["<q>", "q3"]
    assert ex5.history[2][:2] == ["<q>", "q4"]


def test_history_turn_rendering():
    qa = [("Who won?", "Vance did", S2), ("And then?", "nothing", S2)]
    conv = _conv(STORY, qa)
    examples = build_examples(conv)
    ex2 = [e for e in examples if e.turn_number == 2][0]
    assert ex2.history == [["<q>", "who", "won", "?", "<a>", "vance", "did"]]


def test_filtered_turns_stay_in_history():
    qa = [
        ("Did he win?", "Yes.", S1),
        ("Who won the nomination?", "Vance", S2),
    ]
    conv = _conv(STORY, qa)
    examples = build_examples(conv)
    # the yes-turn is not a target ...
    assert [e.turn_number for e in examples] == [2]
    # ... but still shows up as history context
    assert examples[0].history[0][:2] == ["<q>", "did"]


def test_same_sentence_rationales_yield_ces_without_hes():
    qa = [
        ("What party?", "a third term", S1),
        ("What was he unable to seek?", "third term", S1),
    ]
    conv = _conv(STORY, qa)
    ex2 = [e for e in build_examples(conv) if e.turn_number == 2][0]
    assert ex2.evidence[0] == "CES"
    assert "HES" not in ex2.evidence


def test_history_rationale_in_other_sentence_marks_hes():
    qa = [
        ("Who lost?", "Hale", S3),
        ("Who won the nomination?", "Vance", S2),
    ]
    conv = _conv(STORY, qa)
    ex2 = [e for e in build_examples(conv) if e.turn_number == 2][0]
    assert ex2.evidence == ["NONE", "CES", "HES"]


def test_label_evidence_ces_precedence():
    labels = label_evidence([(0, 5), (5, 9)], current_span=(3, 6), history_spans=[(0, 6)])
    assert labels == ["CES", "CES"]


def test_evidence_partition_no_sentence_is_both(train_examples):
    for ex in train_examples:
        assert len(ex.evidence) == len(ex.sentence_boundaries)
        assert all(label in ("CES", "HES", "NONE") for label in ex.evidence)


def test_bio_reconstructs_answer_span(train_examples):
    for ex in train_examples:
        assert span_from_bio_tags(ex.bio_tags) == tuple(ex.answer_span)


def test_chunk_ids_monotone(train_examples):
    for ex in train_examples:
        assert all(a <= b for a, b in zip(ex.chunk_ids, ex.chunk_ids[1:]))


def test_pipeline_spans_are_extractive_on_synthetic(train_examples):
    strong = [ex for ex in train_examples if not ex.weak_alignment]
    assert len(strong) == len(train_examples)
    mean_f1 = sum(ex.span_f1 for ex in train_examples) / len(train_examples)
    assert mean_f1 > 0.95
