"""Per-attribute decision trees, tree models and their JSON form.

Trees are immutable values.  A leaf is addressed by its path: the tuple of
:class:`SignedLiteral` tests taken from the root.  Editing operations return
new trees and share untouched subtrees with the original.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

from .dataset import BinaryDataset, Itemset, RowSet, SignedLiteral
from .depgraph import DependencyGraph
from .mdlcost import CostReport, model_cost

LeafRef = tuple[SignedLiteral, ...]


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class Leaf:
    """Coding table of a leaf: target-value counts among the rows reaching it."""

    n0: int
    n1: int
    rows: RowSet | None = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return self.n0 + self.n1


@dataclass(frozen=True)
class Node:
    attr: int
    pos: "TreeNode"
    neg: "TreeNode"


TreeNode = Union[Leaf, Node]


def make_leaf(ds: BinaryDataset, rows: RowSet, target: int) -> Leaf:
    n0, n1 = ds.value_counts(rows, target)
    return Leaf(n0, n1, rows)


@dataclass(frozen=True)
class DecisionTree:
    target: int
    root: TreeNode

    def leaves(self) -> Iterator[tuple[LeafRef, Leaf]]:
        """Leaves in preorder (positive branch first) with their paths."""
        stack: list[tuple[LeafRef, TreeNode]] = [((), self.root)]
        while stack:
            path, node = stack.pop()
            if isinstance(node, Leaf):
                yield path, node
            else:
                stack.append((path + (SignedLiteral(node.attr, False),), node.neg))
                stack.append((path + (SignedLiteral(node.attr, True),), node.pos))

    def n_leaves(self) -> int:
        return sum(1 for _ in self.leaves())

    def internal_nodes(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Node):
                yield node
                stack.append(node.neg)
                stack.append(node.pos)

    def source(self) -> frozenset[int]:
        return frozenset(n.attr for n in self.internal_nodes())

    def is_trivial(self) -> bool:
        return isinstance(self.root, Leaf)

    def leaf(self, ref: LeafRef) -> Leaf:
        node = self.root
        for attr, positive in ref:
            if not isinstance(node, Node) or node.attr != attr:
                raise TreeError(f"path {format_path(ref)} does not exist")
            node = node.pos if positive else node.neg
        if not isinstance(node, Leaf):
            raise TreeError(f"path {format_path(ref)} ends at an internal node")
        return node

    def route(self, row: Sequence[int]) -> LeafRef:
        """Path of the leaf whose coding table encodes ``row[target]``."""
        node = self.root
        path = []
        while isinstance(node, Node):
            positive = bool(row[node.attr])
            path.append(SignedLiteral(node.attr, positive))
            node = node.pos if positive else node.neg
        return tuple(path)

    def route_leaf(self, row: Sequence[int]) -> Leaf:
        node = self.root
        while isinstance(node, Node):
            node = node.pos if row[node.attr] else node.neg
        return node


def path(ref: LeafRef) -> tuple[Itemset, Itemset]:
    """Split a leaf path into (positively tested, negatively tested) itemsets."""
    pos = tuple(sorted(lit.attr for lit in ref if lit.positive))
    neg = tuple(sorted(lit.attr for lit in ref if not lit.positive))
    return pos, neg


def format_path(ref: LeafRef) -> str:
    return " ".join(str(lit) for lit in ref) or "<root>"


def trivial_tree(ds: BinaryDataset, target: int) -> DecisionTree:
    ds.check_attr(target)
    return DecisionTree(target, make_leaf(ds, ds.all_rows, target))


def split_tree(ds: BinaryDataset, tree: DecisionTree, ref: LeafRef, attr: int) -> DecisionTree:
    ds.check_attr(attr)
    if attr == tree.target:
        raise TreeError(f"cannot split the tree for {attr} on its own target")
    if any(lit.attr == attr for lit in ref):
        raise TreeError(f"attribute {attr} is already tested on the path")
    leaf = tree.leaf(ref)
    rows = leaf.rows if leaf.rows is not None else ds.select_rows(ref)
    col = ds.columns[attr]
    new = Node(attr, make_leaf(ds, rows & col, tree.target), make_leaf(ds, rows & ~col, tree.target))
    return DecisionTree(tree.target, _replace(tree.root, ref, new))


def _replace(node: TreeNode, ref: LeafRef, new: TreeNode) -> TreeNode:
    if not ref:
        return new
    head, rest = ref[0], ref[1:]
    if head.positive:
        return Node(node.attr, _replace(node.pos, rest, new), node.neg)
    return Node(node.attr, node.pos, _replace(node.neg, rest, new))


def join_tree(attr: int, pos: DecisionTree, neg: DecisionTree) -> DecisionTree:
    if pos.target != neg.target:
        raise TreeError("joined trees must share a target")
    if attr == pos.target:
        raise TreeError("cannot join on the target attribute")
    if attr in pos.source() or attr in neg.source():
        raise TreeError(f"attribute {attr} already used in a branch")
    return DecisionTree(pos.target, Node(attr, pos.root, neg.root))


def tree_to_json(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": [node.n0, node.n1]}
    return {"split": node.attr, "pos": tree_to_json(node.pos), "neg": tree_to_json(node.neg)}


def tree_from_json(obj: dict, ds: BinaryDataset | None = None, target: int | None = None,
                   rows: RowSet | None = None) -> TreeNode:
    if "leaf" in obj:
        n0, n1 = obj["leaf"]
        if ds is not None and rows is not None:
            leaf = make_leaf(ds, rows, target)
            if (leaf.n0, leaf.n1) != (n0, n1):
                raise TreeError("stored leaf counts disagree with the dataset")
            return leaf
        return Leaf(int(n0), int(n1))
    attr = int(obj["split"])
    pos_rows = neg_rows = None
    if ds is not None and rows is not None:
        pos_rows, neg_rows = rows & ds.columns[attr], rows & ~ds.columns[attr]
    return Node(attr, tree_from_json(obj["pos"], ds, target, pos_rows),
                tree_from_json(obj["neg"], ds, target, neg_rows))


@dataclass
class TreeModel:
    """One tree per attribute plus the dependency graph they induce."""

    trees: list[DecisionTree]
    attr_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for i, tree in enumerate(self.trees):
            if tree is not None and tree.target != i:
                raise TreeError(f"tree at position {i} encodes attribute {tree.target}")
        if not self.attr_names:
            self.attr_names = tuple(str(i) for i in range(len(self.trees)))

    @property
    def n_attrs(self) -> int:
        return len(self.trees)

    @classmethod
    def trivial(cls, ds: BinaryDataset) -> TreeModel:
        return cls([trivial_tree(ds, i) for i in range(ds.n_attrs)], ds.attr_names)

    def graph(self) -> DependencyGraph:
        g = DependencyGraph(self.n_attrs)
        for tree in self.trees:
            for s in sorted(tree.source()):
                g.add_edge(tree.target, s, check=False)
        return g

    def order(self) -> list[int]:
        """Transmission order: every attribute after the ones its tree tests."""
        return self.graph().transmission_order()

    def cost(self) -> CostReport:
        return model_cost(self)

    def n_nontrivial(self) -> int:
        return sum(not t.is_trivial() for t in self.trees)

    def to_json(self) -> dict:
        return {
            "attributes": list(self.attr_names),
            "trees": [tree_to_json(t.root) for t in self.trees],
            "order": self.order(),
            "cost": self.cost().to_dict(),
        }

    @classmethod
    def from_json(cls, obj: dict, ds: BinaryDataset | None = None) -> TreeModel:
        trees = []
        for i, node in enumerate(obj["trees"]):
            rows = ds.all_rows if ds is not None else None
            trees.append(DecisionTree(i, tree_from_json(node, ds, i, rows)))
        model = cls(trees, tuple(obj.get("attributes", ())))
        if not model.graph().is_acyclic():
            raise TreeError("dependency graph of the stored model has a cycle")
        return model


def leaf_probability_of(leaf: Leaf, value: int, smoothing: str) -> float:
    n = leaf.n1 if value else leaf.n0
    if smoothing == "ml":
        return n / leaf.size if leaf.size else 0.0
    if smoothing == "kt":
        return (n + 0.5) / (leaf.size + 1)
    raise ValueError(f"unknown smoothing {smoothing!r}")


def transaction_code_length(model: TreeModel, row: Sequence[int], smoothing: str = "kt") -> float:
    """Bits to encode one transaction; ``math.inf`` when an ML code gives it probability 0."""
    if len(row) != model.n_attrs:
        raise ValueError(f"row has {len(row)} values, model has {model.n_attrs} attributes")
    bits = 0.0
    for t in model.order():
        tree = model.trees[t]
        p = leaf_probability_of(tree.route_leaf(row), row[t], smoothing)
        if p <= 0.0:
            return math.inf
        bits -= math.log2(p)
    return bits
