"""Itemsets implied by trees, and coding tables rebuilt from itemset frequencies.

A leaf reached by testing ``pos`` positive and ``neg`` negative needs exactly
the frequencies of ``pos + V`` and ``pos + V + target`` for every ``V`` within
``neg``; inclusion-exclusion over those recovers its coding table.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .dataset import Itemset, canonical_itemset
from .dtree import DecisionTree, LeafRef, TreeModel, path

BOUNDARY_TOL = 1e-9


class ReconstructionError(ValueError):
    pass


def sort_key(itemset: Itemset) -> tuple[int, Itemset]:
    return len(itemset), itemset


def sorted_family(itemsets: Iterable[Itemset]) -> list[Itemset]:
    return sorted(set(itemsets), key=sort_key)


def _subsets(items: Sequence[int]) -> Iterable[tuple[int, ...]]:
    for r in range(len(items) + 1):
        yield from combinations(items, r)


def leaf_sets(ref: LeafRef, target: int) -> set[Itemset]:
    pos, neg = path(ref)
    out = set()
    for v in _subsets(neg):
        base = pos + v
        out.add(canonical_itemset(base))
        out.add(canonical_itemset(base + (target,)))
    return out


def tree_sets(tree: DecisionTree) -> set[Itemset]:
    out: set[Itemset] = set()
    for ref, _ in tree.leaves():
        out |= leaf_sets(ref, tree.target)
    return out


def model_sets(model: TreeModel, drop_empty: bool = False) -> list[Itemset]:
    """Deduplicated union over all leaves, sorted by size then lexicographically."""
    out: set[Itemset] = set()
    for tree in model.trees:
        out |= tree_sets(tree)
    if drop_empty:
        out.discard(())
    return sorted_family(out)


def annotated_model_sets(model: TreeModel) -> dict[Itemset, list[tuple[int, LeafRef]]]:
    """Map each itemset to the (tree, leaf) pairs that need it."""
    out: dict[Itemset, list[tuple[int, LeafRef]]] = {}
    for tree in model.trees:
        for ref, _ in tree.leaves():
            for itemset in leaf_sets(ref, tree.target):
                out.setdefault(itemset, []).append((tree.target, ref))
    return {k: out[k] for k in sorted_family(out)}


def leaf_probability(freqs: Mapping[Itemset, float], pos: Iterable[int], neg: Iterable[int]) -> float:
    """Fraction of rows with every ``pos`` item present and every ``neg`` item absent."""
    pos = canonical_itemset(pos)
    neg = canonical_itemset(neg)
    total = 0.0
    for v in _subsets(neg):
        key = canonical_itemset(pos + v)
        try:
            fr = freqs[key]
        except KeyError:
            raise ReconstructionError(f"missing frequency of {key}") from None
        total += -fr if len(v) % 2 else fr
    if total < -BOUNDARY_TOL or total > 1.0 + BOUNDARY_TOL:
        raise ReconstructionError(f"inconsistent frequencies: probability {total}")
    return min(1.0, max(0.0, total))


def reconstruct_coding_table(freqs: Mapping[Itemset, float], ref: LeafRef, target: int) -> float:
    """Probability that ``target`` is 1 among rows reaching the leaf at ``ref``."""
    pos, neg = path(ref)
    reach = leaf_probability(freqs, pos, neg)
    if reach == 0.0:
        raise ReconstructionError("leaf is reached by no rows; conditional undefined")
    joint = leaf_probability(freqs, canonical_itemset(pos + (target,)), neg)
    return joint / reach


def format_itemset(itemset: Itemset, names: Sequence[str] | None = None) -> str:
    if not itemset:
        return "{}"
    if names is None:
        return " ".join(str(i) for i in itemset)
    return " ".join(names[i] for i in itemset)


def write_itemsets(itemsets: Iterable[Itemset], names: Sequence[str] | None = None,
                   supports: Mapping[Itemset, int] | None = None) -> str:
    lines = []
    for itemset in itemsets:
        line = format_itemset(itemset, names)
        if supports is not None and itemset in supports:
            line += f" ({supports[itemset]})"
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")
