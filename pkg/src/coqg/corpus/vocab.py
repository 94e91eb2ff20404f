"""Token vocabulary with fixed reserved symbols."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from pathlib import Path

from .types import ANSWER_MARKER, QUESTION_MARKER, ProcessedExample

PAD = "<pad>"
UNK = "<unk>"
BOS = "<bos>"
EOS = "<eos>"

RESERVED = [PAD, UNK, BOS, EOS, QUESTION_MARKER, ANSWER_MARKER]

PAD_ID = 0
UNK_ID = 1
BOS_ID = 2
EOS_ID = 3
QUESTION_MARKER_ID = 4
ANSWER_MARKER_ID = 5


class Vocabulary:
    """Bijective token <-> index map; indices 0..5 are reserved."""

    def __init__(self, tokens: list[str], min_frequency: int = 1):
        self.min_frequency = min_frequency
        self._itos: list[str] = []
        self._stoi: dict[str, int] = {}
        for tok in RESERVED + [t for t in tokens if t not in RESERVED]:
            if tok in self._stoi:
                raise ValueError(f"duplicate vocabulary token {tok!r}")
            self._stoi[tok] = len(self._itos)
            self._itos.append(tok)

    def __len__(self) -> int:
        return len(self._itos)

    def __contains__(self, token: str) -> bool:
        return token in self._stoi

    def index(self, token: str) -> int:
        return self._stoi.get(token, UNK_ID)

    def token(self, index: int) -> str:
        return self._itos[index]

    @property
    def tokens(self) -> list[str]:
        return list(self._itos)

    def hash(self) -> str:
        h = hashlib.sha256()
        for tok in self._itos:
            h.update(tok.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()

    def save(self, path: str | Path) -> None:
        payload = {"min_frequency": self.min_frequency, "tokens": self._itos}
        Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        tokens = payload["tokens"]
        if tokens[: len(RESERVED)] != RESERVED:
            raise ValueError(f"{path}: reserved symbols missing or reordered")
        return cls(tokens[len(RESERVED):], min_frequency=payload.get("min_frequency", 1))


def build_vocabulary(examples: list[ProcessedExample], min_frequency: int = 1) -> Vocabulary:
    """Count tokens over passages, target questions and history; keep those
    reaching ``min_frequency``, ordered by (-count, token) for determinism."""
    counts: Counter = Counter()
    for ex in examples:
        counts.update(ex.passage_tokens)
        counts.update(ex.target_question)
        for turn in ex.history:
            counts.update(turn)
    kept = [t for t, c in counts.items() if c >= min_frequency and t not in RESERVED]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(kept, min_frequency=min_frequency)
