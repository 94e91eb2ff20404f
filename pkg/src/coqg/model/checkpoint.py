"""Versioned checkpoint container with config/vocabulary guards."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import torch

from ..corpus.vocab import Vocabulary
from .config import ModelConfig
from .network import QuestionGenerator

FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(path: str | Path, model: QuestionGenerator, vocab: Vocabulary) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "vocab_hash": vocab.hash(),
        "vocab_tokens": vocab.tokens,
        "vocab_min_frequency": vocab.min_frequency,
        "state_dict": model.state_dict(),
    }
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        torch.save(payload, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(
    path: str | Path,
    expected_vocab: Vocabulary | None = None,
    expected_config: ModelConfig | None = None,
) -> tuple[QuestionGenerator, Vocabulary]:
    path = Path(path)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise CheckpointError(f"{path}: cannot read checkpoint: {exc}") from exc
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version!r}")

    from ..corpus.vocab import RESERVED

    tokens = payload["vocab_tokens"]
    vocab = Vocabulary(tokens[len(RESERVED):], min_frequency=payload.get("vocab_min_frequency", 1))
    if vocab.hash() != payload["vocab_hash"]:
        raise CheckpointError(f"{path}: stored vocabulary does not match its hash")
    if expected_vocab is not None and expected_vocab.hash() != payload["vocab_hash"]:
        raise CheckpointError(f"{path}: vocabulary mismatch with the supplied vocabulary")

    config = ModelConfig.from_dict(payload["config"])
    if expected_config is not None and expected_config.to_dict() != config.to_dict():
        raise CheckpointError(f"{path}: config mismatch with the supplied config")
    if config.vocab_size != len(vocab):
        raise CheckpointError(f"{path}: config vocab_size {config.vocab_size} != vocabulary size {len(vocab)}")

    model = QuestionGenerator(config)
    try:
        model.load_state_dict(payload["state_dict"], strict=True)
    except RuntimeError as exc:
        raise CheckpointError(f"{path}: parameter shapes do not match config: {exc}") from exc
    model.eval()
    return model, vocab
