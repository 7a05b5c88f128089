"""Synthetic toy data: independent coins, Markov chains, and a two-class mix."""

from __future__ import annotations

import numpy as np

from .dataset import BinaryDataset


def independent_toy(n_rows: int = 2000, n_attrs: int = 10, seed: int = 0) -> BinaryDataset:
    """Every attribute an independent fair coin."""
    rng = np.random.default_rng(seed)
    return BinaryDataset.from_matrix(rng.integers(0, 2, size=(n_rows, n_attrs)))


def chain_toy(n_rows: int = 2000, n_attrs: int = 10, keep: float = 0.9, seed: int = 0) -> BinaryDataset:
    """First attribute a fair coin; each later one copies its predecessor with probability ``keep``."""
    rng = np.random.default_rng(seed)
    data = np.empty((n_rows, n_attrs), dtype=np.uint8)
    data[:, 0] = rng.integers(0, 2, size=n_rows)
    for k in range(1, n_attrs):
        flip = rng.random(n_rows) >= keep
        data[:, k] = data[:, k - 1] ^ flip
    return BinaryDataset.from_matrix(data)


def two_class_toy(n_per_class: int = 2000, n_attrs: int = 10, keep: float = 0.9,
                  seed: int = 0) -> tuple[BinaryDataset, list[int]]:
    """Class 0 rows come from the chain process, class 1 rows from independent coins.

    Rows are shuffled; the labels list is aligned with the returned rows.
    """
    rng = np.random.default_rng(seed)
    chain = chain_toy(n_per_class, n_attrs, keep, int(rng.integers(2**31))).to_matrix()
    coins = independent_toy(n_per_class, n_attrs, int(rng.integers(2**31))).to_matrix()
    data = np.vstack([chain, coins])
    labels = np.array([0] * n_per_class + [1] * n_per_class)
    perm = rng.permutation(len(labels))
    return BinaryDataset.from_matrix(data[perm]), [int(v) for v in labels[perm]]
