import pytest
import torch

from coqg.corpus.vocab import build_vocabulary
from coqg.model import (
    CheckpointError,
    ModelConfig,
    QuestionGenerator,
    index_example,
    load_checkpoint,
    save_checkpoint,
)

from conftest import mini_example, small_config


def _trained_pair(seed=0):
    ex = mini_example()
    vocab = build_vocabulary([ex], min_frequency=1)
    model = QuestionGenerator(small_config(len(vocab), seed=seed))
    return model, vocab, ex


def test_round_trip(tmp_path):
    model, vocab, ex = _trained_pair()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, vocab)
    loaded, loaded_vocab = load_checkpoint(path)
    assert loaded_vocab.tokens == vocab.tokens
    assert loaded.config.to_dict() == model.config.to_dict()
    for key, value in model.state_dict().items():
        assert torch.equal(loaded.state_dict()[key], value)
    # loaded model reproduces outputs
    idx = index_example(ex, vocab)
    model.eval()
    with torch.no_grad():
        a, _ = model(idx)
        b, _ = loaded(idx)
    assert torch.equal(a, b)


def test_vocabulary_mismatch_refused(tmp_path):
    model, vocab, ex = _trained_pair()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, vocab)
    other = build_vocabulary([mini_example()], min_frequency=2)
    with pytest.raises(CheckpointError, match="vocabulary"):
        load_checkpoint(path, expected_vocab=other)


def test_config_mismatch_refused(tmp_path):
    model, vocab, ex = _trained_pair()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, vocab)
    other = small_config(len(vocab), seed=0, hidden_dim=64)
    with pytest.raises(CheckpointError, match="config"):
        load_checkpoint(path, expected_config=other)


def test_version_mismatch_refused(tmp_path):
    model, vocab, _ = _trained_pair()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, vocab)
    payload = torch.load(path, weights_only=False)
    payload["format_version"] = 99
    torch.save(payload, path)
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(path)


def test_tampered_vocab_hash_refused(tmp_path):
    model, vocab, _ = _trained_pair()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, vocab)
    payload = torch.load(path, weights_only=False)
    payload["vocab_tokens"] = payload["vocab_tokens"][:-1] + ["tampered"]
    torch.save(payload, path)
    with pytest.raises(CheckpointError, match="hash"):
        load_checkpoint(path)


def test_unreadable_file_refused(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"not a checkpoint")
    with pytest.raises(CheckpointError, match="cannot read"):
        load_checkpoint(path)


def test_save_overwrites_atomically(tmp_path):
    model, vocab, _ = _trained_pair(seed=1)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, vocab)
    model2, vocab2, _ = _trained_pair(seed=2)
    save_checkpoint(path, model2, vocab2)
    loaded, _ = load_checkpoint(path)
    assert torch.equal(
        loaded.state_dict()["word_emb.weight"], model2.state_dict()["word_emb.weight"]
    )
    assert not list(tmp_path.glob(".*.tmp"))
