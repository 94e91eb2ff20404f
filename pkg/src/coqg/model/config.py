"""Model hyperparameters.

Loss weights: ``coref_attention_weight`` scales the log of attention mass on
the coreferent mention, ``coref_output_weight`` the log-probability of the
pronoun; ``flow_evidence_weight`` scales the log of passage-attention mass on
current evidence sentences and ``flow_history_penalty`` the linear penalty on
history-evidence mass.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, asdict


@dataclass
class ModelConfig:
    vocab_size: int
    word_dim: int = 128
    answer_pos_dim: int = 16
    turn_dim: int = 16
    chunk_dim: int = 16
    hidden_dim: int = 256
    num_chunks: int = 10
    max_turn: int = 20
    coref_attention_weight: float = 1.0
    coref_output_weight: float = 1.0
    flow_evidence_weight: float = 1.0
    flow_history_penalty: float = 0.5
    flow_per_step: bool = False
    dropout: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("vocab_size", "word_dim", "answer_pos_dim", "turn_dim", "chunk_dim",
                     "hidden_dim", "num_chunks", "max_turn"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.hidden_dim % 2 != 0:
            raise ValueError("hidden_dim must be even (bidirectional halves)")
        for name in ("coref_attention_weight", "coref_output_weight",
                     "flow_evidence_weight", "flow_history_penalty"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})
