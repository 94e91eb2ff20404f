from hypothesis import given, strategies as st

from coqg.corpus.tokenizer import (
    char_span_to_token_span,
    sentence_token_ranges,
    split_sentences,
    tokenize,
    tokenize_with_offsets,
)


def test_basic_tokenization():
    assert tokenize("Hello, world!") == ["hello", ",", "world", "!"]
    assert tokenize("It's a don't-care case.") == ["it's", "a", "don't", "-", "care", "case", "."]


def test_offsets_point_back_into_text():
    text = "Bush was seen as the early favorite."
    for tok, s, e in tokenize_with_offsets(text):
        assert text[s:e].lower() == tok


def test_case_preserving_mode():
    assert tokenize("Bill Clinton", lowercase=False) == ["Bill", "Clinton"]


def test_sentence_split_spans():
    text = "Anna kept a map. It was red! Where is it now?"
    spans = split_sentences(text)
    assert [text[s:e] for s, e in spans] == [
        "Anna kept a map.",
        "It was red!",
        "Where is it now?",
    ]


def test_sentence_token_ranges_partition():
    text = "Anna kept a map. It was red! Where is it now?"
    offsets = tokenize_with_offsets(text)
    ranges = sentence_token_ranges(split_sentences(text), offsets)
    assert ranges[0][0] == 0
    assert ranges[-1][1] == len(offsets)
    for (a, b), (c, d) in zip(ranges, ranges[1:]):
        assert b == c
        assert a < b


def test_char_span_to_token_span():
    text = "the dog ran far"
    offsets = tokenize_with_offsets(text)
    assert char_span_to_token_span(4, 7, offsets) == (1, 1)
    assert char_span_to_token_span(4, 11, offsets) == (1, 2)
    assert char_span_to_token_span(0, len(text), offsets) == (0, 3)
    assert char_span_to_token_span(3, 4, offsets) is None  # whitespace only


@given(st.text(min_size=0, max_size=200))
def test_tokens_cover_word_characters(text):
    offsets = tokenize_with_offsets(text)
    covered = set()
    for _, s, e in offsets:
        covered.update(range(s, e))
    for i, ch in enumerate(text):
        if ch.isalnum():
            assert i in covered


@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=200))
def test_sentence_ranges_are_a_partition(text):
    offsets = tokenize_with_offsets(text)
    spans = split_sentences(text)
    ranges = sentence_token_ranges(spans, offsets)
    assert len(ranges) == len(spans)
    if not ranges:
        return
    assert ranges[0][0] == 0
    assert ranges[-1][1] == len(offsets)
    for (_, b), (c, _) in zip(ranges, ranges[1:]):
        assert b == c
