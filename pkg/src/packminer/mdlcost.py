"""Code lengths in bits: leaf data cost, NML leaf regret, tree and model totals."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

LN2 = math.log(2.0)


@dataclass(frozen=True)
class CostReport:
    data_bits: float = 0.0
    structure_bits: float = 0.0
    regret_bits: float = 0.0

    @property
    def total(self) -> float:
        return self.data_bits + self.structure_bits + self.regret_bits

    def __add__(self, other: CostReport) -> CostReport:
        return CostReport(
            self.data_bits + other.data_bits,
            self.structure_bits + other.structure_bits,
            self.regret_bits + other.regret_bits,
        )

    def to_dict(self) -> dict:
        return {
            "data_bits": self.data_bits,
            "structure_bits": self.structure_bits,
            "regret_bits": self.regret_bits,
            "total": self.total,
        }


def entropy_cost(n0: int, n1: int) -> float:
    """Bits to send ``n0`` zeros and ``n1`` ones with the leaf's ML code."""
    if n0 < 0 or n1 < 0:
        raise ValueError("counts must be non-negative")
    m = n0 + n1
    bits = 0.0
    if n0:
        bits -= n0 * math.log2(n0 / m)
    if n1:
        bits -= n1 * math.log2(n1 / m)
    return bits


class _RegretTable:
    """Memo of the binary NML normaliser; concurrent reads, locked inserts."""

    def __init__(self) -> None:
        self._values: dict[int, float] = {0: 0.0, 1: 1.0}
        self._lock = threading.Lock()

    def __call__(self, m: int) -> float:
        try:
            return self._values[m]
        except KeyError:
            pass
        if m < 0:
            raise ValueError("leaf size must be non-negative")
        value = _regret_direct(m)
        with self._lock:
            self._values.setdefault(m, value)
        return value

    def precompute(self, upto: int) -> None:
        for m in range(upto + 1):
            self(m)

    def __len__(self) -> int:
        return len(self._values)


def _regret_direct(m: int) -> float:
    # log-sum-exp of log C(m,k) + k ln(k/m) + (m-k) ln((m-k)/m), k = 0..m
    k = np.arange(m + 1, dtype=np.float64)
    rest = m - k
    with np.errstate(divide="ignore", invalid="ignore"):
        kk = np.where(k > 0, k * np.log(k / m), 0.0)
        rr = np.where(rest > 0, rest * np.log(rest / m), 0.0)
    terms = gammaln(m + 1.0) - gammaln(k + 1.0) - gammaln(rest + 1.0) + kk + rr
    top = terms.max()
    return float((top + math.log(math.fsum(np.exp(terms - top)))) / LN2)


leaf_regret = _RegretTable()
leaf_regret.__doc__ = "NML parametric complexity (bits) of a Bernoulli leaf over ``m`` rows."


def split_overhead(n_attrs: int) -> float:
    """Structure bits of one internal node: the leaf/internal flag plus the attribute id."""
    if n_attrs < 1:
        raise ValueError("K must be at least 1")
    return 1.0 + math.log2(n_attrs)


def leaf_cost(n0: int, n1: int) -> float:
    """Everything one leaf contributes: flag bit, regret and data bits."""
    return 1.0 + leaf_regret(n0 + n1) + entropy_cost(n0, n1)


def leaf_report(n0: int, n1: int) -> CostReport:
    return CostReport(entropy_cost(n0, n1), 1.0, leaf_regret(n0 + n1))


def tree_cost(tree, n_attrs: int) -> CostReport:
    """Decomposed cost of a :class:`~packminer.dtree.DecisionTree`.

    Leaves that carry row sets are checked against their counts, and sibling
    subtrees must cover disjoint rows.
    """
    from .dtree import Leaf

    overhead = split_overhead(n_attrs)
    data = structure = regret = 0.0

    def walk(node):
        nonlocal data, structure, regret
        if isinstance(node, Leaf):
            if node.rows is not None and node.rows.bit_count() != node.n0 + node.n1:
                raise ValueError("leaf counts do not match its rows")
            data += entropy_cost(node.n0, node.n1)
            structure += 1.0
            regret += leaf_regret(node.n0 + node.n1)
            return node.rows
        structure += overhead
        pos, neg = walk(node.pos), walk(node.neg)
        if pos is None or neg is None:
            return None
        if pos & neg:
            raise ValueError(f"branches of split on {node.attr} share rows")
        return pos | neg

    walk(tree.root)
    return CostReport(data, structure, regret)


def model_cost(model) -> CostReport:
    if any(t is None for t in model.trees) or len(model.trees) != model.n_attrs:
        raise ValueError("model must hold exactly one tree per attribute")
    total = CostReport()
    for tree in model.trees:
        total = total + tree_cost(tree, model.n_attrs)
    return total
