"""Greedy construction of a tree model directly from data.

Every pass finds, for each attribute, the single split that lowers the cost
of its tree the most, then applies the best of those if it saves bits.
Splits are only allowed when the new dependency edge keeps the graph acyclic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .dataset import BinaryDataset
from .depgraph import DependencyGraph
from .dtree import DecisionTree, LeafRef, TreeModel, split_tree, trivial_tree
from .mdlcost import CostReport, leaf_cost, model_cost, split_overhead

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitCandidate:
    tree: int
    leaf: LeafRef
    attr: int
    gain: float  # post-split cost minus current cost; negative means bits saved


def best_split_for_tree(ds: BinaryDataset, tree: DecisionTree, graph: DependencyGraph) -> SplitCandidate | None:
    """Admissible split of ``tree`` with the lowest resulting cost, if any beats the tree.

    Only the split leaf's terms change, so each candidate costs one bitmap
    intersection and two popcounts.  Ties keep the first leaf in preorder and
    the smallest split attribute.
    """
    i = tree.target
    overhead = split_overhead(ds.n_attrs)
    target_col = ds.columns[i]
    admissible = [j for j in range(ds.n_attrs) if graph.would_be_acyclic(i, j)]
    best: SplitCandidate | None = None
    best_gain = 0.0
    for ref, leaf in tree.leaves():
        on_path = {lit.attr for lit in ref}
        rows = leaf.rows
        before = leaf_cost(leaf.n0, leaf.n1)
        for j in admissible:
            if j in on_path:
                continue
            pos = rows & ds.columns[j]
            m_pos = pos.bit_count()
            n1_pos = (pos & target_col).bit_count()
            n0_pos = m_pos - n1_pos
            gain = overhead + leaf_cost(n0_pos, n1_pos) + leaf_cost(leaf.n0 - n0_pos, leaf.n1 - n1_pos) - before
            if gain < best_gain:
                best_gain = gain
                best = SplitCandidate(i, ref, j, gain)
    return best


@dataclass
class GreedyTrace:
    """Per-run bookkeeping, useful for A/B checks and reports."""

    accepted: list[SplitCandidate]
    evaluations: int = 0


def greedy_pack(ds: BinaryDataset, use_cache: bool = True, check: bool = True,
                trace: GreedyTrace | None = None) -> tuple[TreeModel, CostReport]:
    """Build a tree model by greedy splitting, starting from trivial trees.

    With ``use_cache`` the best split of a tree is kept across passes and
    recomputed only when its tree changed or its split attribute stopped being
    admissible.  Admissibility only ever shrinks, so a still-admissible cached
    optimum stays optimal and the result equals the uncached run.
    """
    K = ds.n_attrs
    trees = [trivial_tree(ds, i) for i in range(K)]
    graph = DependencyGraph(K)
    model = TreeModel(trees, ds.attr_names)
    total = model_cost(model).total
    trace = trace if trace is not None else GreedyTrace([])
    cache: list[SplitCandidate | None] = [None] * K
    stale = [True] * K

    while True:
        for i in range(K):
            if use_cache and not stale[i]:
                cand = cache[i]
                if cand is None or graph.would_be_acyclic(i, cand.attr):
                    continue
            cache[i] = best_split_for_tree(ds, trees[i], graph)
            stale[i] = False
            trace.evaluations += 1

        chosen = None
        for cand in cache:
            if cand is not None and (chosen is None or cand.gain < chosen.gain):
                chosen = cand
        if chosen is None or not chosen.gain < 0.0:
            break

        k = chosen.tree
        trees[k] = split_tree(ds, trees[k], chosen.leaf, chosen.attr)
        graph.add_edge(k, chosen.attr)
        total += chosen.gain
        trace.accepted.append(chosen)
        stale[k] = True
        if not use_cache:
            stale = [True] * K
        log.debug("split tree %d at %s on %d, gain %.3f bits", k, chosen.leaf, chosen.attr, chosen.gain)

        if check:
            assert graph.is_acyclic()
            fresh = model_cost(TreeModel(trees, ds.attr_names)).total
            assert abs(fresh - total) < 1e-6 * max(1.0, fresh), (fresh, total)

    model = TreeModel(trees, ds.attr_names)
    return model, model_cost(model)
