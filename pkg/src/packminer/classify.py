"""Compression-based classification: one packed model per class, shortest code wins."""

from __future__ import annotations

import math
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Sequence

from .candidates import ItemsetFamily
from .dataset import BinaryDataset
from .dtree import TreeModel, transaction_code_length
from .greedypack import greedy_pack
from .setpack import set_pack


class ClassifyError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledDataset:
    dataset: BinaryDataset
    labels: tuple

    def __post_init__(self) -> None:
        if len(self.labels) != self.dataset.n_rows:
            raise ClassifyError(f"{len(self.labels)} labels for {self.dataset.n_rows} rows")

    def classes(self) -> list:
        return sorted(set(self.labels), key=_label_key)

    def subset(self, indices: Sequence[int]) -> LabeledDataset:
        return LabeledDataset(self.dataset.subset(indices), tuple(self.labels[i] for i in indices))


def _label_key(label):
    return (0, label, "") if isinstance(label, (int, float)) else (1, 0, str(label))


@dataclass(frozen=True)
class Algorithm:
    """Which packer to run per class: ``greedy``, or ``select`` with a family and search mode."""

    name: str = "greedy"
    family: ItemsetFamily | None = None
    mode: str = "exhaustive"
    minsup_frac: float | None = None


@dataclass
class ClassifierModel:
    models: dict
    sizes: dict
    prior: bool = False

    def scores(self, row: Sequence[int]) -> dict:
        total = sum(self.sizes.values())
        out = {}
        for label, model in self.models.items():
            bits = transaction_code_length(model, row, "kt")
            if self.prior:
                bits -= math.log2(self.sizes[label] / total)
            out[label] = bits
        return out

    def predict(self, row: Sequence[int]):
        """Label whose model encodes ``row`` in the fewest bits.

        Ties go to the class with more training rows, then the smaller label.
        """
        scores = self.scores(row)
        return min(scores, key=lambda c: (scores[c], -self.sizes[c], _label_key(c)))


def _pack(ds: BinaryDataset, algorithm: Algorithm) -> TreeModel:
    if algorithm.name == "greedy":
        return greedy_pack(ds)[0]
    if algorithm.name == "select":
        from .candidates import mine_frequent

        family = algorithm.family
        if family is None:
            if algorithm.minsup_frac is None:
                raise ClassifyError("select needs a candidate family or a minimum support")
            family = mine_frequent(ds, max(1, math.ceil(algorithm.minsup_frac * ds.n_rows)))
        return set_pack(ds, family, algorithm.mode).model
    raise ClassifyError(f"unknown algorithm {algorithm.name!r}")


def train(data: LabeledDataset, algorithm: Algorithm = Algorithm(), workers: int = 1,
          prior: bool = False) -> ClassifierModel:
    classes = data.classes()
    if len(classes) < 2:
        raise ClassifyError("training needs at least two classes")
    parts = {}
    for label in classes:
        idx = [r for r, lab in enumerate(data.labels) if lab == label]
        parts[label] = data.dataset.subset(idx)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {label: pool.submit(_pack, ds, algorithm) for label, ds in parts.items()}
            models = {label: f.result() for label, f in futures.items()}
    else:
        models = {label: _pack(ds, algorithm) for label, ds in parts.items()}
    return ClassifierModel(models, {label: ds.n_rows for label, ds in parts.items()}, prior)


def predict(model: ClassifierModel, row: Sequence[int]):
    return model.predict(row)


def evaluate(data: LabeledDataset, split: float = 0.9, seed: int = 0, algorithm: Algorithm = Algorithm(),
             workers: int = 1, prior: bool = False) -> dict:
    """Seeded holdout: train on ``split`` of the shuffled rows, score the rest."""
    if not 0.0 < split < 1.0:
        raise ClassifyError("split must lie strictly between 0 and 1")
    n = data.dataset.n_rows
    n_train = int(round(split * n))
    if n_train == 0 or n_train == n:
        raise ClassifyError(f"split {split} leaves an empty side for {n} rows")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    train_idx, test_idx = sorted(order[:n_train]), sorted(order[n_train:])
    model = train(data.subset(train_idx), algorithm, workers, prior)

    rows = data.dataset.rows()
    confusion: dict = {}
    correct = 0
    for r in test_idx:
        truth, guess = data.labels[r], model.predict(rows[r])
        correct += truth == guess
        confusion.setdefault(str(truth), Counter())[str(guess)] += 1
    return {
        "accuracy": correct / len(test_idx),
        "n_train": n_train,
        "n_test": len(test_idx),
        "seed": seed,
        "split": split,
        "confusion": {t: dict(sorted(c.items())) for t, c in sorted(confusion.items())},
        "class_sizes": {str(k): v for k, v in model.sizes.items()},
    }


def read_labels(text: str) -> list[Hashable]:
    labels = [line.strip() for line in text.splitlines() if line.strip()]
    return [int(x) if x.lstrip("-").isdigit() else x for x in labels]
