"""Tree selection restricted to a candidate itemset family.

``TreeSearch`` answers best-tree queries for one target attribute: the
cheapest tree that only tests attributes from a given source set and whose
implied itemsets all lie in the candidate family.  ``set_pack`` grows the
per-attribute source sets pass by pass with a minimum arborescence over the
candidate improvements.
"""

from __future__ import annotations

import logging
from bisect import insort
from dataclasses import dataclass, field
from typing import Iterable

from .candidates import ItemsetFamily
from .dataset import BinaryDataset, SignedLiteral
from .depgraph import dmst
from .dtree import DecisionTree, Leaf, Node, TreeModel
from .mdlcost import CostReport, leaf_cost, model_cost, split_overhead

log = logging.getLogger(__name__)

MODES = ("exhaustive", "greedy")
PROPAGATION = ("ancestors", "parents")


class TreeSearch:
    """Best-tree queries for a single target over a fixed dataset and family.

    The family is projected onto the target once, so a root attribute ``b``
    is admissible at a node exactly when ``path + b + target`` is a member,
    which together with downward closure keeps every implied itemset inside
    the family.
    """

    def __init__(self, ds: BinaryDataset, family: ItemsetFamily, target: int, mode: str = "exhaustive") -> None:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.ds = ds
        self.target = target
        self.mode = mode
        self.overhead = split_overhead(ds.n_attrs)
        self._families: dict[frozenset[int], ItemsetFamily] = {frozenset(): family.project(target)}
        self.calls = 0

    def _family(self, attrs: frozenset[int], parent: frozenset[int], b: int) -> ItemsetFamily:
        fam = self._families.get(attrs)
        if fam is None:
            fam = self._families[parent].project(b)
            self._families[attrs] = fam
        return fam

    def best_tree(self, sources: Iterable[int]) -> tuple[float, DecisionTree]:
        """Return ``(cost, tree)`` of the cheapest admissible tree using only ``sources``."""
        self.calls += 1
        sources = frozenset(sources) - {self.target}
        memo: dict[tuple[SignedLiteral, ...], tuple[float, object]] = {}
        solve = self._exhaustive if self.mode == "exhaustive" else self._greedy
        cost, root = solve((), self.ds.all_rows, frozenset(), sources, memo)
        return cost, DecisionTree(self.target, root)

    def _leaf(self, rows: int) -> tuple[float, Leaf]:
        n0, n1 = self.ds.value_counts(rows, self.target)
        return leaf_cost(n0, n1), Leaf(n0, n1, rows)

    def _roots(self, attrs: frozenset[int], sources: frozenset[int]) -> list[int]:
        return sorted(sources & self._families[attrs].universe)

    def _exhaustive(self, lits, rows, attrs, sources, memo):
        hit = memo.get(lits)
        if hit is not None:
            return hit
        best_cost, best_node = self._leaf(rows)
        # any split costs at least the overhead plus two one-bit leaves
        if best_cost > self.overhead + 2.0:
            for b in self._roots(attrs, sources):
                sub = attrs | {b}
                self._family(sub, attrs, b)
                col = self.ds.columns[b]
                pos_lits = list(lits)
                insort(pos_lits, SignedLiteral(b, True))
                neg_lits = list(lits)
                insort(neg_lits, SignedLiteral(b, False))
                cp, tp = self._exhaustive(tuple(pos_lits), rows & col, sub, sources, memo)
                cn, tn = self._exhaustive(tuple(neg_lits), rows & ~col, sub, sources, memo)
                cost = self.overhead + cp + cn
                if cost < best_cost:
                    best_cost, best_node = cost, Node(b, tp, tn)
        memo[lits] = (best_cost, best_node)
        return best_cost, best_node

    def _greedy(self, lits, rows, attrs, sources, memo):
        leaf_bits, leaf = self._leaf(rows)
        best_b, best_split = None, leaf_bits
        if leaf_bits > self.overhead + 2.0:
            for b in self._roots(attrs, sources):
                pos = rows & self.ds.columns[b]
                neg = rows & ~self.ds.columns[b]
                cost = (self.overhead + leaf_cost(*self.ds.value_counts(pos, self.target))
                        + leaf_cost(*self.ds.value_counts(neg, self.target)))
                if cost < best_split:
                    best_b, best_split = b, cost
        if best_b is None:
            return leaf_bits, leaf
        sub = attrs | {best_b}
        self._family(sub, attrs, best_b)
        col = self.ds.columns[best_b]
        cp, tp = self._greedy(lits, rows & col, sub, sources, memo)
        cn, tn = self._greedy(lits, rows & ~col, sub, sources, memo)
        return self.overhead + cp + cn, Node(best_b, tp, tn)


def generate(ds: BinaryDataset, family: ItemsetFamily, target: int, sources: Iterable[int],
             mode: str = "exhaustive") -> DecisionTree:
    """Best tree for ``target`` over ``sources`` with all implied itemsets in ``family``."""
    return TreeSearch(ds, family, target, mode).best_tree(sources)[1]


@dataclass
class SetPackResult:
    sources: list[frozenset[int]]
    marking_order: list[int]
    model: TreeModel
    cost: CostReport
    passes: int
    forced_singletons: tuple[int, ...] = ()
    pass_costs: list[list[float]] = field(default_factory=list)
    generate_calls: int = 0

    def sources_json(self, names=None) -> dict:
        names = names or [str(i) for i in range(len(self.sources))]
        return {
            "sources": {names[i]: [names[s] for s in sorted(src)] for i, src in enumerate(self.sources)},
            "marking_order": [names[i] for i in self.marking_order],
            "passes": self.passes,
            "forced_singletons": [names[i] for i in self.forced_singletons],
        }


class _WeightCache:
    """Best-tree results keyed by (target, sources); dropped per target when its sources grow."""

    def __init__(self, searches: list[TreeSearch], enabled: bool) -> None:
        self.searches = searches
        self.enabled = enabled
        self.entries: dict[int, dict[frozenset[int], tuple[float, DecisionTree]]] = {}

    def get(self, i: int, sources: frozenset[int]) -> tuple[float, DecisionTree]:
        per = self.entries.setdefault(i, {})
        if self.enabled and sources in per:
            return per[sources]
        result = self.searches[i].best_tree(sources)
        per[sources] = result
        return result

    def invalidate(self, i: int) -> None:
        self.entries.pop(i, None)


def set_pack(ds: BinaryDataset, family: ItemsetFamily, mode: str = "exhaustive",
             propagate: str = "ancestors", use_cache: bool = True) -> SetPackResult:
    if propagate not in PROPAGATION:
        raise ValueError(f"unknown propagation {propagate!r}")
    K = ds.n_attrs
    family = family.with_singletons(K)
    searches = [TreeSearch(ds, family, i, mode) for i in range(K)]
    cache = _WeightCache(searches, use_cache)
    sources = [frozenset() for _ in range(K)]
    marked = [False] * K
    order: list[int] = []
    pass_costs = []
    passes = 0

    while not all(marked):
        passes += 1
        weights: dict[tuple[int, int], float] = {}
        sink_costs = []
        for i in range(K):
            w0 = cache.get(i, sources[i])[0]
            sink_costs.append(w0)
            weights[(i + 1, 0)] = w0
            if marked[i]:
                continue
            for j in range(K):
                if j == i or j in sources[i]:
                    continue
                w = cache.get(i, sources[i] | {j})[0]
                if w <= w0:
                    weights[(i + 1, j + 1)] = w
        pass_costs.append(sink_costs)
        heads = dmst(K + 1, weights, sink=0)
        parent = {v - 1: (h - 1 if h else None) for v, h in heads.items()}

        newly = [i for i in range(K) if not marked[i] and parent[i] is None]
        for i in newly:
            marked[i] = True
            order.append(i)
        grown = set()
        for i in newly:
            for j in range(K):
                if marked[j]:
                    continue
                if propagate == "parents":
                    hit = parent[j] == i
                else:
                    hit = _passes_through(parent, j, i)
                if hit:
                    sources[j] = sources[j] | {i}
                    grown.add(j)
        for a in range(K):
            b = parent[a]
            if not marked[a] and b is not None and marked[b] and b not in sources[a]:
                sources[a] = sources[a] | {b}
                grown.add(a)
        for j in grown:
            cache.invalidate(j)
        log.debug("pass %d: marked %s, grew %s", passes, newly, sorted(grown))
        if not newly and not grown:
            raise RuntimeError("set_pack made no progress")

    trees = [cache.get(i, sources[i])[1] for i in range(K)]
    model = TreeModel(trees, ds.attr_names)
    return SetPackResult(
        sources=sources,
        marking_order=order,
        model=model,
        cost=model_cost(model),
        passes=passes,
        forced_singletons=family.forced,
        pass_costs=pass_costs,
        generate_calls=sum(s.calls for s in searches),
    )


def _passes_through(parent: dict[int, int | None], start: int, via: int) -> bool:
    v = parent[start]
    while v is not None:
        if v == via:
            return True
        v = parent[v]
    return False
