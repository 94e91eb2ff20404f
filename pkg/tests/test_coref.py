import json
from collections import Counter

import pytest

from coqg.corpus.coref import (
    PRONOUN_LEXICON,
    CorefFileProvider,
    HeuristicCorefProvider,
    annotate_coreference,
    pronouns_in,
)
from coqg.corpus.examples import build_examples
from coqg.corpus.types import RawConversation, Turn

STORY = (
    "President Milton was unable to seek a third term because of term limits. "
    "His deputy Vance won the party's nomination with ease."
)
from coqg.corpus.tokenizer import split_sentences

S1, S2 = split_sentences(STORY)


def _conv(qa, id="c"):
    turns = [Turn(i + 1, q, a, r) for i, (q, a, r) in enumerate(qa)]
    return RawConversation(id=id, passage_text=STORY, turns=turns)


def _turn2_example(conv):
    return [e for e in build_examples(conv) if e.turn_number == 2][0]


def test_pronoun_lexicon_contents():
    assert {"he", "she", "it", "they", "them", "his", "her", "its", "their"} <= set(PRONOUN_LEXICON)
    assert pronouns_in(["what", "was", "he", "doing"]) == [2]


def test_heuristic_links_pronoun_to_history_name():
    conv = _conv(
        [
            ("What office did Milton hold?", "President", S1),
            ("What was he unable to seek?", "a third term", S1),
        ]
    )
    ex = _turn2_example(conv)
    ann = annotate_coreference(conv, ex, HeuristicCorefProvider())
    assert ann is not None
    flat = ex.flat_history()
    assert [flat[p] for p in ann.mention_positions] == ["milton"]
    assert ex.target_question[ann.pronoun_index] == "he"
    assert ann.confidence == 1.0


def test_no_pronouns_yields_none():
    conv = _conv(
        [
            ("Who held office?", "Milton", S1),
            ("Who won the nomination?", "Vance", S2),
        ]
    )
    ex = _turn2_example(conv)
    assert annotate_coreference(conv, ex, HeuristicCorefProvider()) is None


def test_first_linkable_pronoun_wins():
    conv = _conv(
        [
            ("What did Milton want?", "a third term", S1),
            ("Was he sure it was over?", "term limits", S1),
        ]
    )
    ex = _turn2_example(conv)
    ann = annotate_coreference(conv, ex, HeuristicCorefProvider())
    assert ann is not None
    # "he" (index 1) is linkable, so "it" (index 3) must not be chosen
    assert ex.target_question[ann.pronoun_index] == "he"


def test_gender_mismatch_blocks_link():
    conv = _conv(
        [
            ("What did Tom keep?", "a third term", S1),
            ("Where did she go?", "term limits", S1),
        ]
    )
    ex = _turn2_example(conv)
    # "tom" is in the male lexicon, so "she" must not resolve to it
    assert annotate_coreference(conv, ex, HeuristicCorefProvider()) is None


def test_neuter_pronoun_matches_thing_noun():
    conv = _conv(
        [
            ("Who kept the map safe?", "Milton", S1),
            ("Where is it now?", "term limits", S1),
        ]
    )
    ex = _turn2_example(conv)
    ann = annotate_coreference(conv, ex, HeuristicCorefProvider())
    assert ann is not None
    flat = ex.flat_history()
    assert [flat[p] for p in ann.mention_positions] == ["map"]


def test_empty_history_yields_none():
    conv = _conv([("Where did he go?", "a third term", S1)])
    ex = build_examples(conv)[0]
    assert ex.history == []
    assert annotate_coreference(conv, ex, HeuristicCorefProvider()) is None


def test_adjacent_name_tokens_merge():
    conv = _conv(
        [
            ("Did voters like President Bill Milton?", "a third term", S1),
            ("What was he unable to seek?", "a third term", S1),
        ]
    )
    ex = _turn2_example(conv)
    ann = annotate_coreference(conv, ex, HeuristicCorefProvider())
    flat = ex.flat_history()
    # the whole capitalized title+name run counts as one mention
    assert [flat[p] for p in ann.mention_positions] == ["president", "bill", "milton"]


def _file_provider(tmp_path, rows):
    path = tmp_path / "coref.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
    return CorefFileProvider(path)


def test_file_provider_reads_annotation(tmp_path):
    conv = _conv(
        [
            ("What office did Milton hold?", "President", S1),
            ("What was he unable to seek?", "a third term", S1),
        ]
    )
    ex = _turn2_example(conv)
    flat = ex.flat_history()
    mention = [i for i, t in enumerate(flat) if t == "milton"]
    provider = _file_provider(
        tmp_path,
        [
            {
                "conversation_id": "c",
                "turn_id": 2,
                "mention_positions": mention,
                "pronoun_index": ex.target_question.index("he"),
                "confidence": 0.75,
            }
        ],
    )
    ann = annotate_coreference(conv, ex, provider)
    assert ann is not None
    assert ann.confidence == 0.75
    assert [flat[p] for p in ann.mention_positions] == ["milton"]


def test_file_provider_confidence_clamped(tmp_path):
    conv = _conv(
        [
            ("What office did Milton hold?", "President", S1),
            ("What was he unable to seek?", "a third term", S1),
        ]
    )
    ex = _turn2_example(conv)
    provider = _file_provider(
        tmp_path,
        [{"conversation_id": "c", "turn_id": 2, "mention_positions": [1],
          "pronoun_index": ex.target_question.index("he"), "confidence": 7.5}],
    )
    ann = annotate_coreference(conv, ex, provider)
    assert ann.confidence == 1.0


def test_out_of_window_annotation_dropped(tmp_path):
    conv = _conv(
        [
            ("What office did Milton hold?", "President", S1),
            ("What was he unable to seek?", "a third term", S1),
        ]
    )
    ex = _turn2_example(conv)
    provider = _file_provider(
        tmp_path,
        [{"conversation_id": "c", "turn_id": 2, "mention_positions": [999],
          "pronoun_index": ex.target_question.index("he"), "confidence": 1.0}],
    )
    dropped = Counter()
    assert annotate_coreference(conv, ex, provider, dropped) is None
    assert dropped["out_of_window"] == 1


def test_non_pronoun_target_index_dropped(tmp_path):
    conv = _conv(
        [
            ("What office did Milton hold?", "President", S1),
            ("What was he unable to seek?", "a third term", S1),
        ]
    )
    ex = _turn2_example(conv)
    provider = _file_provider(
        tmp_path,
        [{"conversation_id": "c", "turn_id": 2, "mention_positions": [1],
          "pronoun_index": 0, "confidence": 1.0}],  # token "what"
    )
    dropped = Counter()
    assert annotate_coreference(conv, ex, provider, dropped) is None
    assert dropped["out_of_window"] == 1


def test_heuristic_coverage_on_synthetic(conversations, train_examples):
    with_pronouns = [ex for ex in train_examples if pronouns_in(ex.target_question)]
    annotated = [ex for ex in train_examples if ex.coref is not None]
    assert annotated, "expected some coreference annotations on the synthetic corpus"
    assert len(annotated) <= len(with_pronouns)
    for ex in annotated:
        flat_len = len(ex.flat_history())
        assert all(0 <= p < flat_len for p in ex.coref.mention_positions)
        assert ex.target_question[ex.coref.pronoun_index] in PRONOUN_LEXICON
