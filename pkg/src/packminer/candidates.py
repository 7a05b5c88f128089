"""Downward-closed itemset families: mining, projection, file round-trips."""

from __future__ import annotations

import logging
import re
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

from .dataset import BinaryDataset, Itemset, canonical_itemset
from .extract import sort_key, write_itemsets

log = logging.getLogger(__name__)

_SUPPORT = re.compile(r"^(.*?)\s*\((\d+)\)\s*$")


class FamilyError(ValueError):
    pass


class ItemsetFamily:
    """Immutable collection of itemsets, stored as sorted tuples.

    ``supports`` is optional per-itemset support counts.  ``forced`` lists
    singletons added to make every attribute's trivial tree admissible.
    """

    def __init__(self, itemsets: Iterable[Iterable[int]] = ((),), supports: Mapping[Itemset, int] | None = None,
                 forced: Iterable[int] = ()) -> None:
        self._sets = frozenset(canonical_itemset(x) for x in itemsets)
        self.supports = dict(supports or {})
        self.forced = tuple(sorted(forced))
        self._universe: frozenset[int] | None = None

    def __contains__(self, itemset) -> bool:
        return canonical_itemset(itemset) in self._sets

    def __iter__(self) -> Iterator[Itemset]:
        return iter(sorted(self._sets, key=sort_key))

    def __len__(self) -> int:
        return len(self._sets)

    def __eq__(self, other) -> bool:
        return isinstance(other, ItemsetFamily) and self._sets == other._sets

    def __hash__(self) -> int:
        return hash(self._sets)

    def __repr__(self) -> str:
        return f"ItemsetFamily({list(self)})"

    @property
    def sets(self) -> frozenset[Itemset]:
        return self._sets

    @property
    def universe(self) -> frozenset[int]:
        if self._universe is None:
            self._universe = frozenset(i for x in self._sets for i in x)
        return self._universe

    def max_size(self) -> int:
        return max((len(x) for x in self._sets), default=0)

    def project(self, item: int) -> ItemsetFamily:
        """Members containing ``item``, with ``item`` removed."""
        return ItemsetFamily(tuple(i for i in x if i != item) for x in self._sets if item in x)

    def restrict_size(self, max_size: int) -> ItemsetFamily:
        keep = [x for x in self._sets if len(x) <= max_size]
        return ItemsetFamily(keep, {x: s for x, s in self.supports.items() if len(x) <= max_size}, self.forced)

    def is_downward_closed(self) -> bool:
        for x in self._sets:
            for i in range(len(x)):
                if x[:i] + x[i + 1:] not in self._sets:
                    return False
        return True

    def closure(self) -> ItemsetFamily:
        """Smallest downward-closed family containing this one (always holds the empty set)."""
        out = set(self._sets) | {()}
        for x in self._sets:
            for r in range(len(x)):
                out.update(combinations(x, r))
        return ItemsetFamily(out, self.supports, self.forced)

    def with_singletons(self, n_attrs: int) -> ItemsetFamily:
        """Add every missing singleton (and the empty set)."""
        missing = [i for i in range(n_attrs) if (i,) not in self._sets]
        if not missing and () in self._sets:
            return self
        return ItemsetFamily(set(self._sets) | {()} | {(i,) for i in missing}, self.supports,
                             tuple(self.forced) + tuple(missing))


def mine_frequent(ds: BinaryDataset, minsup: int, max_size: int | None = None) -> ItemsetFamily:
    """All itemsets with support at least ``minsup``, by depth-first bitmap intersection."""
    if minsup < 1:
        raise FamilyError("minsup must be at least 1")
    found: dict[Itemset, int] = {(): ds.n_rows} if ds.n_rows >= minsup else {}
    if not found:
        return ItemsetFamily([()], {(): ds.n_rows})
    frequent_items = []
    for k in range(ds.n_attrs):
        sup = ds.columns[k].bit_count()
        if sup >= minsup:
            frequent_items.append((k, ds.columns[k], sup))

    def expand(prefix: Itemset, rows: int, tail: list[tuple[int, int, int]]) -> None:
        for pos, (item, col, _) in enumerate(tail):
            both = rows & col
            sup = both.bit_count()
            if sup < minsup:
                continue
            itemset = prefix + (item,)
            found[itemset] = sup
            if max_size is None or len(itemset) < max_size:
                expand(itemset, both, tail[pos + 1:])

    if max_size is None or max_size >= 1:
        expand((), ds.all_rows, frequent_items)
    return ItemsetFamily(found, found)


def parse_family(text: str, attr_names: Sequence[str] | None = None, repair: bool = True) -> ItemsetFamily:
    """Read one itemset per line; ``{}`` is the empty set; ``(n)`` suffix is a support count.

    Tokens are attribute names when ``attr_names`` is given and the token is a
    known name, otherwise non-negative integer ids.
    """
    lookup = {name: k for k, name in enumerate(attr_names)} if attr_names else {}
    itemsets = []
    supports = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        support = None
        m = _SUPPORT.match(line)
        if m:
            line, support = m.group(1).strip(), int(m.group(2))
        items = []
        if line != "{}":
            for token in line.split():
                if token in lookup:
                    items.append(lookup[token])
                    continue
                try:
                    item = int(token)
                except ValueError:
                    raise FamilyError(f"line {lineno}: unknown item {token!r}") from None
                if item < 0:
                    raise FamilyError(f"line {lineno}: negative item id {item}")
                items.append(item)
        if len(set(items)) != len(items):
            raise FamilyError(f"line {lineno}: repeated item")
        itemset = canonical_itemset(items)
        itemsets.append(itemset)
        if support is not None:
            supports[itemset] = support
    fam = ItemsetFamily(itemsets, supports)
    if not fam.is_downward_closed() or () not in fam:
        if not repair:
            raise FamilyError("family is not downward closed")
        closed = fam.closure()
        log.warning("candidate family not downward closed; added %d subsets", len(closed) - len(fam))
        fam = closed
    return fam


def format_family(fam: ItemsetFamily, names: Sequence[str] | None = None) -> str:
    return write_itemsets(list(fam), names, fam.supports or None)


def load_family(path: str, attr_names: Sequence[str] | None = None) -> ItemsetFamily:
    with open(path, encoding="utf-8") as fh:
        return parse_family(fh.read(), attr_names)


def save_family(fam: ItemsetFamily, path: str, names: Sequence[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_family(fam, names))
