from __future__ import annotations

import os
from pathlib import Path

import pytest
import torch

import synthetic
from coqg.cli import main as cli_main
from coqg.corpus.coqa import load_coqa
from coqg.corpus.io import read_examples_jsonl
from coqg.corpus.types import CorefAnnotation, ProcessedExample
from coqg.corpus.vocab import Vocabulary, build_vocabulary
from coqg.model import ModelConfig, QuestionGenerator, index_example

CORPUS_SEED = 7
CORPUS_SIZE = 120


@pytest.fixture(scope="session")
def corpus_path(tmp_path_factory) -> Path:
    """CoQA-format training corpus: real data when COQG_COQA_TRAIN points at
    it, the synthetic stand-in otherwise."""
    env = os.environ.get("COQG_COQA_TRAIN")
    if env:
        return Path(env)
    path = tmp_path_factory.mktemp("corpus") / "train.json"
    synthetic.write_corpus(path, CORPUS_SIZE, seed=CORPUS_SEED)
    return path


@pytest.fixture(scope="session")
def conversations(corpus_path):
    return load_coqa(corpus_path)


@pytest.fixture(scope="session")
def prepared_dir(tmp_path_factory, corpus_path) -> Path:
    out = tmp_path_factory.mktemp("prepared")
    rc = cli_main(["preprocess", str(corpus_path), "--out", str(out), "--seed", "0"])
    assert rc == 0
    return out


@pytest.fixture(scope="session")
def train_examples(prepared_dir) -> list[ProcessedExample]:
    return read_examples_jsonl(prepared_dir / "train.jsonl")


@pytest.fixture(scope="session")
def vocab(prepared_dir) -> Vocabulary:
    return Vocabulary.load(prepared_dir / "vocab.json")


def small_config(vocab_size: int, seed: int = 0, **overrides) -> ModelConfig:
    base = dict(
        vocab_size=vocab_size,
        word_dim=24,
        answer_pos_dim=4,
        turn_dim=4,
        chunk_dim=4,
        hidden_dim=32,
        num_chunks=10,
        max_turn=20,
        dropout=0.0,
        seed=seed,
    )
    base.update(overrides)
    return ModelConfig(**base)


@pytest.fixture
def make_model():
    def factory(vocab_size: int, seed: int = 0, **overrides) -> QuestionGenerator:
        model = QuestionGenerator(small_config(vocab_size, seed=seed, **overrides))
        model.eval()
        return model

    return factory


def mini_example(with_coref: bool = True, with_history: bool = True) -> ProcessedExample:
    """Small hand-built example covering answer span, evidence and coref."""
    history = [["<q>", "who", "kept", "the", "map", "?", "<a>", "anna"]] if with_history else []
    coref = (
        CorefAnnotation(mention_positions=[7], pronoun_index=2, confidence=1.0)
        if with_coref and with_history
        else None
    )
    return ProcessedExample(
        conversation_id="mini",
        turn_number=2 if with_history else 1,
        passage_tokens="anna kept a red map . the map sat in the attic .".split(),
        sentence_boundaries=[(0, 6), (6, 13)],
        answer_span=(9, 11),
        bio_tags=["O"] * 9 + ["B_ANS", "I_ANS", "I_ANS", "O"],
        chunk_ids=[i * 4 // 13 for i in range(13)],
        history=history,
        target_question=["where", "did", "she", "keep", "it", "?"],
        evidence=["HES", "CES"] if with_history else ["NONE", "CES"],
        coref=coref,
    )


@pytest.fixture
def tiny_bundle():
    """(model, vocab, indexed example) trio for decoder-level tests."""
    ex = mini_example()
    vocab = build_vocabulary([ex], min_frequency=1)
    cfg = small_config(len(vocab), seed=3)
    model = QuestionGenerator(cfg)
    model.eval()
    idx = index_example(ex, vocab, max_turn=cfg.max_turn)
    return model, vocab, idx


@pytest.fixture(autouse=True)
def _fixed_torch_state():
    torch.manual_seed(0)
    yield
