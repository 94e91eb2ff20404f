"""Example -> tensor-ready index conversion, including copy ids.

Out-of-vocabulary source tokens get per-example extended ids
(vocab_size + position in the example's OOV list) so the copy distribution
can place mass on them.  Decoder *inputs* always use base-vocabulary ids
(extended ids map back to UNK); prediction *targets* use extended ids when
the gold token is copyable.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..corpus.types import BIO_BEGIN, BIO_INSIDE, EVIDENCE_CURRENT, EVIDENCE_HISTORY, ProcessedExample
from ..corpus.vocab import BOS_ID, EOS_ID, UNK_ID, Vocabulary

_BIO_IDS = {"O": 0, BIO_BEGIN: 1, BIO_INSIDE: 2}


@dataclass
class CorefSupervision:
    mention_positions: list[int]  # into the flattened history sequence
    step: int  # decoding timestep of the pronoun (its target position)
    pronoun_id: int  # base-vocabulary id of the pronoun token
    confidence: float


@dataclass
class IndexedExample:
    conversation_id: str
    turn_number: int
    passage_ids: list[int]
    passage_ext_ids: list[int]
    bio_ids: list[int]
    chunk_ids: list[int]
    history_ids: list[list[int]]
    history_ext_ids: list[int]  # flattened, aligned with conversation attention
    target_in_ids: list[int]  # BOS + target prefix, base vocab
    target_out_ids: list[int]  # target + EOS, extended vocab
    oov_tokens: list[str]
    ces_token_mask: list[bool]
    hes_token_mask: list[bool]
    coref: CorefSupervision | None

    @property
    def extended_size_offset(self) -> int:
        return len(self.oov_tokens)

    def extended_token(self, ext_id: int, vocab: Vocabulary) -> str:
        if ext_id < len(vocab):
            return vocab.token(ext_id)
        return self.oov_tokens[ext_id - len(vocab)]


def index_example(
    example: ProcessedExample,
    vocab: Vocabulary,
    max_turn: int | None = None,
) -> IndexedExample:
    oov: dict[str, int] = {}

    def ext_id(tok: str) -> int:
        base = vocab.index(tok)
        if base != UNK_ID or tok in vocab:
            return base
        if tok not in oov:
            oov[tok] = len(oov)
        return len(vocab) + oov[tok]

    passage_ids = [vocab.index(t) for t in example.passage_tokens]
    passage_ext = [ext_id(t) for t in example.passage_tokens]
    history_ids = [[vocab.index(t) for t in turn] for turn in example.history]
    history_ext = [ext_id(t) for t in example.flat_history()]

    target_tokens = example.target_question
    target_in = [BOS_ID] + [vocab.index(t) for t in target_tokens]
    target_out = [ext_id_for_target(t, vocab, oov) for t in target_tokens] + [EOS_ID]

    turn_number = example.turn_number
    if max_turn is not None:
        turn_number = min(turn_number, max_turn)

    coref = None
    if example.coref is not None:
        ann = example.coref.clamped()
        pronoun_tok = example.target_question[ann.pronoun_index]
        coref = CorefSupervision(
            mention_positions=list(ann.mention_positions),
            step=ann.pronoun_index,
            pronoun_id=vocab.index(pronoun_tok),
            confidence=ann.confidence,
        )

    oov_tokens = [None] * len(oov)
    for tok, i in oov.items():
        oov_tokens[i] = tok

    return IndexedExample(
        conversation_id=example.conversation_id,
        turn_number=turn_number,
        passage_ids=passage_ids,
        passage_ext_ids=passage_ext,
        bio_ids=[_BIO_IDS[t] for t in example.bio_tags],
        chunk_ids=list(example.chunk_ids),
        history_ids=history_ids,
        history_ext_ids=history_ext,
        target_in_ids=target_in,
        target_out_ids=target_out,
        oov_tokens=oov_tokens,
        ces_token_mask=example.evidence_token_mask(EVIDENCE_CURRENT),
        hes_token_mask=example.evidence_token_mask(EVIDENCE_HISTORY),
        coref=coref,
    )


def ext_id_for_target(tok: str, vocab: Vocabulary, oov: dict[str, int]) -> int:
    """Target tokens may point at source OOVs but never extend the list."""
    base = vocab.index(tok)
    if base != UNK_ID or tok in vocab:
        return base
    if tok in oov:
        return len(vocab) + oov[tok]
    return UNK_ID
