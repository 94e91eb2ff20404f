"""Pronoun-to-mention alignment annotations.

Two providers are available:

* :class:`CorefFileProvider` reads precomputed cluster annotations from a
  JSONL file keyed by (conversation_id, turn_id) -- the normal route when an
  external resolver has been run offline.
* :class:`HeuristicCorefProvider` is a dependency-free fallback: it links the
  first pronoun of the target question to the nearest preceding history
  mention whose number/gender is compatible, using capitalization cues plus a
  small name/noun lexicon.

Annotations referencing tokens outside the history window are dropped and
counted, never raised.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

from .tokenizer import tokenize
from .types import ANSWER_MARKER, QUESTION_MARKER, CorefAnnotation, ProcessedExample, RawConversation

PRONOUN_LEXICON = frozenset(
    {"he", "him", "his", "she", "her", "hers", "it", "its", "they", "them", "their", "theirs"}
)

_MALE = frozenset({"he", "him", "his"})
_FEMALE = frozenset({"she", "her", "hers"})
_NEUTER = frozenset({"it", "its"})
_PLURAL = frozenset({"they", "them", "their", "theirs"})

# Small gender lexicon refining the capitalization heuristic; unknown proper
# nouns remain compatible with both he/she.
MALE_WORDS = frozenset(
    {"man", "boy", "father", "brother", "husband", "son", "king", "uncle", "grandfather",
     "john", "james", "bill", "william", "george", "david", "michael", "robert", "tom",
     "peter", "jack", "henry", "paul", "sam", "charlie"}
)
FEMALE_WORDS = frozenset(
    {"woman", "girl", "mother", "sister", "wife", "daughter", "queen", "aunt", "grandmother",
     "mary", "anna", "emma", "alice", "sarah", "lucy", "jane", "susan", "linda", "kate",
     "emily", "rose", "laura", "julia", "grace"}
)
NEUTER_WORDS = frozenset(
    {"dog", "cat", "book", "house", "car", "tree", "city", "river", "box", "ball",
     "school", "store", "letter", "song", "ship", "train", "garden", "map", "ring", "lamp"}
)

_STOPWORDS = frozenset(
    {"a", "an", "the", "of", "to", "in", "on", "at", "for", "with", "and", "or", "but",
     "is", "was", "are", "were", "be", "been", "did", "do", "does", "had", "has", "have",
     "what", "who", "whom", "whose", "which", "where", "when", "why", "how", "that",
     "this", "these", "those", "not", "no", "yes", "by", "from", "as", "so", "if",
     QUESTION_MARKER, ANSWER_MARKER}
)


def pronouns_in(tokens: list[str]) -> list[int]:
    return [i for i, t in enumerate(tokens) if t in PRONOUN_LEXICON]


class CorefFileProvider:
    """Reads annotations exported by an external coreference resolver.

    JSONL rows: {"conversation_id": ..., "turn_id": ..., "mention_positions":
    [...], "pronoun_index": ..., "confidence": ...} where mention positions
    index the flattened history token sequence of that example.
    """

    def __init__(self, path: str | Path):
        self._table: dict[tuple[str, int], dict] = {}
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                key = (str(row["conversation_id"]), int(row["turn_id"]))
                self._table[key] = row

    def annotate(self, conv: RawConversation, example: ProcessedExample) -> CorefAnnotation | None:
        row = self._table.get((example.conversation_id, example.turn_number))
        if row is None:
            return None
        ann = CorefAnnotation(
            mention_positions=[int(p) for p in row["mention_positions"]],
            pronoun_index=int(row["pronoun_index"]),
            confidence=float(row.get("confidence", 1.0)),
        )
        return ann.clamped()


class HeuristicCorefProvider:
    """Nearest preceding compatible mention, resolved from surface cues.

    Candidate mentions are capitalized tokens of the original history text
    that do not start a question/answer (to avoid sentence-initial
    capitalization), plus lexicon nouns.  Adjacent candidates of the same
    class merge into one mention (e.g. first + last name).  Confidence is
    always 1.0.
    """

    def annotate(self, conv: RawConversation, example: ProcessedExample) -> CorefAnnotation | None:
        pron_positions = pronouns_in(example.target_question)
        if not pron_positions:
            return None
        window = self._history_window_turns(conv, example)
        if not window:
            return None
        flat_cased = []
        for turn in window:
            flat_cased.append((QUESTION_MARKER, False))
            flat_cased.extend(self._cased_tokens(turn.question_text))
            flat_cased.append((ANSWER_MARKER, False))
            flat_cased.extend(self._cased_tokens(turn.answer_text))
        if len(flat_cased) != len(example.flat_history()):
            return None  # tokenization drifted; refuse to guess
        for pron_idx in pron_positions:
            pronoun = example.target_question[pron_idx]
            positions = self._match_mention(pronoun, flat_cased)
            if positions:
                return CorefAnnotation(positions, pron_idx, confidence=1.0)
        return None

    @staticmethod
    def _history_window_turns(conv: RawConversation, example: ProcessedExample):
        i = example.turn_number
        n = len(example.history)
        turns_by_id = {t.turn_id: t for t in conv.turns}
        return [turns_by_id[j] for j in range(i - n, i) if j in turns_by_id]

    @staticmethod
    def _cased_tokens(text: str) -> list[tuple[str, bool]]:
        """(lowercased token, had capital initial and not text-initial)."""
        toks = tokenize(text, lowercase=False)
        out = []
        for pos, tok in enumerate(toks):
            capital = tok[:1].isupper() and pos > 0
            out.append((tok.lower(), capital))
        return out

    @staticmethod
    def _candidate_class(token: str, capital: bool) -> str | None:
        """Classify a token as a mention candidate: person/thing/plural."""
        if token in PRONOUN_LEXICON or token in _STOPWORDS or not token.isalpha():
            return None
        if token in MALE_WORDS:
            return "male"
        if token in FEMALE_WORDS:
            return "female"
        if token in NEUTER_WORDS:
            return "thing"
        if capital:
            return "person"
        if len(token) > 3 and token.endswith("s"):
            return "plural"
        return None

    def _match_mention(self, pronoun: str, flat: list[tuple[str, bool]]) -> list[int]:
        if pronoun in _MALE:
            wanted = {"male", "person"}
        elif pronoun in _FEMALE:
            wanted = {"female", "person"}
        elif pronoun in _NEUTER:
            wanted = {"thing"}
        elif pronoun in _PLURAL:
            wanted = {"plural"}
        else:
            return []
        classes = [self._candidate_class(tok, cap) for tok, cap in flat]
        # nearest preceding = rightmost matching run in the flattened history
        end = None
        for i in range(len(flat) - 1, -1, -1):
            if classes[i] in wanted:
                end = i
                break
        if end is None:
            return []
        start = end
        while start > 0 and classes[start - 1] in wanted:
            start -= 1
        return list(range(start, end + 1))


def annotate_coreference(
    conv: RawConversation,
    example: ProcessedExample,
    provider,
    dropped: Counter | None = None,
) -> CorefAnnotation | None:
    """Run ``provider`` and validate its annotation against the example.

    Out-of-window mention positions or pronoun indices invalidate the
    annotation; such drops are tallied in ``dropped`` when given.
    """
    ann = provider.annotate(conv, example)
    if ann is None:
        return None
    flat_len = len(example.flat_history())
    ok = (
        len(ann.mention_positions) > 0
        and all(0 <= p < flat_len for p in ann.mention_positions)
        and 0 <= ann.pronoun_index < len(example.target_question)
        and example.target_question[ann.pronoun_index] in PRONOUN_LEXICON
    )
    if not ok:
        if dropped is not None:
            dropped["out_of_window"] += 1
        return None
    return ann.clamped()
