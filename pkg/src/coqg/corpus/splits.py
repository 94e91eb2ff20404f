"""Seeded conversation-level dataset splitting."""

from __future__ import annotations

import random

from .types import RawConversation


def split_dataset(
    conversations: list[RawConversation],
    seed: int = 0,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> tuple[list[RawConversation], list[RawConversation], list[RawConversation]]:
    """80/10/10 split at conversation granularity, deterministic per seed.

    No conversation appears in more than one split; leftover items from the
    floor arithmetic land in the test split.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("split ratios must sum to 1")
    order = list(conversations)
    random.Random(seed).shuffle(order)
    n = len(order)
    n_train = int(n * ratios[0])
    n_val = int(n * ratios[1])
    train = order[:n_train]
    val = order[n_train : n_train + n_val]
    test = order[n_train + n_val :]
    return train, val, test
