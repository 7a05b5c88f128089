import random

import numpy as np
import pytest

from packminer.dataset import BinaryDataset

A, B, C = 0, 1, 2


@pytest.fixture
def d0():
    """Rows (a, b, c): 110, 100, 011, 001."""
    return BinaryDataset.from_matrix([[1, 1, 0], [1, 0, 0], [0, 1, 1], [0, 0, 1]], ("a", "b", "c"))


def random_dataset(rng: random.Random, n_rows: int, n_attrs: int, density: float | None = None) -> BinaryDataset:
    p = rng.uniform(0.2, 0.8) if density is None else density
    matrix = [[int(rng.random() < p) for _ in range(n_attrs)] for _ in range(n_rows)]
    return BinaryDataset.from_matrix(np.array(matrix, dtype=np.uint8).reshape(n_rows, n_attrs))


def correlated_dataset(rng: random.Random, n_rows: int, n_attrs: int) -> BinaryDataset:
    """Each attribute copies a random earlier one with a random strength, else a coin."""
    cols = []
    for k in range(n_attrs):
        if k and rng.random() < 0.7:
            src = cols[rng.randrange(k)]
            keep = rng.uniform(0.6, 0.95)
            cols.append([v if rng.random() < keep else 1 - v for v in src])
        else:
            p = rng.uniform(0.2, 0.8)
            cols.append([int(rng.random() < p) for _ in range(n_rows)])
    return BinaryDataset.from_matrix(np.array(cols, dtype=np.uint8).T.reshape(n_rows, n_attrs))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
