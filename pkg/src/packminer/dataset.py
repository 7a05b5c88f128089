"""Binary transaction data stored as one row-bitmap per attribute.

A row set is a plain Python ``int`` whose bit ``r`` says whether transaction
``r`` belongs to the set.  Intersections are ``&`` and cardinalities are
``int.bit_count``, both of which run in C, so counting never loops over rows
in Python.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

Itemset = tuple[int, ...]
RowSet = int


class DatasetError(ValueError):
    """Raised for malformed input data or invalid attribute references."""


class SignedLiteral(NamedTuple):
    attr: int
    positive: bool

    def __str__(self) -> str:
        return f"{self.attr}{'+' if self.positive else '-'}"


def popcount(rows: RowSet) -> int:
    return rows.bit_count()


def rows_to_list(rows: RowSet) -> list[int]:
    out = []
    while rows:
        low = rows & -rows
        out.append(low.bit_length() - 1)
        rows ^= low
    return out


def canonical_itemset(items: Iterable[int]) -> Itemset:
    return tuple(sorted(set(items)))


@dataclass(frozen=True)
class BinaryDataset:
    """Immutable K-attribute binary dataset.

    ``columns[k]`` is the row bitmap of attribute ``k``.  ``attr_names`` holds
    display labels; for FIMI input with gaps in the item ids they are the
    original ids, which keeps reports in the source numbering.
    """

    n_rows: int
    columns: tuple[int, ...]
    attr_names: tuple[str, ...] = ()
    all_rows: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n_rows < 1:
            raise DatasetError("dataset has no rows")
        if not self.columns:
            raise DatasetError("dataset has no attributes")
        full = (1 << self.n_rows) - 1
        for k, col in enumerate(self.columns):
            if col < 0 or col & ~full:
                raise DatasetError(f"column {k} has bits outside {self.n_rows} rows")
        if not self.attr_names:
            object.__setattr__(self, "attr_names", tuple(str(k) for k in range(len(self.columns))))
        elif len(self.attr_names) != len(self.columns):
            raise DatasetError("attr_names length does not match the number of columns")
        object.__setattr__(self, "all_rows", full)

    @property
    def n_attrs(self) -> int:
        return len(self.columns)

    @classmethod
    def from_matrix(cls, matrix, attr_names: Sequence[str] = ()) -> BinaryDataset:
        """Build from a 2-D array-like of 0/1 values, rows are transactions."""
        arr = np.asarray(matrix)
        if arr.ndim != 2:
            raise DatasetError("expected a 2-D matrix")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise DatasetError("matrix values must be 0 or 1")
        n_rows, n_attrs = arr.shape
        columns = []
        for k in range(n_attrs):
            packed = np.packbits(arr[:, k].astype(bool), bitorder="little")
            columns.append(int.from_bytes(packed.tobytes(), "little"))
        return cls(n_rows, tuple(columns), tuple(attr_names))

    def to_matrix(self) -> np.ndarray:
        nbytes = (self.n_rows + 7) // 8
        out = np.empty((self.n_rows, self.n_attrs), dtype=np.uint8)
        for k, col in enumerate(self.columns):
            bits = np.unpackbits(
                np.frombuffer(col.to_bytes(nbytes, "little"), dtype=np.uint8), bitorder="little"
            )
            out[:, k] = bits[: self.n_rows]
        return out

    def check_attr(self, attr: int) -> None:
        if not 0 <= attr < self.n_attrs:
            raise DatasetError(f"attribute {attr} out of range [0, {self.n_attrs})")

    def support_rows(self, itemset: Iterable[int]) -> RowSet:
        rows = self.all_rows
        for item in itemset:
            self.check_attr(item)
            rows &= self.columns[item]
        return rows

    def support(self, itemset: Iterable[int]) -> int:
        return popcount(self.support_rows(itemset))

    def frequency(self, itemset: Iterable[int]) -> float:
        """Fraction of transactions containing every item; 1.0 for the empty set."""
        return self.support(itemset) / self.n_rows

    def select_rows(self, literals: Iterable[SignedLiteral]) -> RowSet:
        rows = self.all_rows
        seen = set()
        for attr, positive in literals:
            self.check_attr(attr)
            if attr in seen:
                raise DatasetError(f"attribute {attr} appears twice in literal conjunction")
            seen.add(attr)
            rows &= self.columns[attr] if positive else ~self.columns[attr]
        return rows & self.all_rows

    def value_counts(self, rows: RowSet, attr: int) -> tuple[int, int]:
        self.check_attr(attr)
        n1 = (rows & self.columns[attr]).bit_count()
        return rows.bit_count() - n1, n1

    def row(self, r: int) -> tuple[int, ...]:
        if not 0 <= r < self.n_rows:
            raise IndexError(r)
        return tuple((col >> r) & 1 for col in self.columns)

    def rows(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.to_matrix()]

    def subset(self, row_indices: Sequence[int]) -> BinaryDataset:
        """New dataset made of the given rows, in the given order."""
        matrix = self.to_matrix()[list(row_indices)]
        return BinaryDataset.from_matrix(matrix, self.attr_names)

    def density(self) -> float:
        ones = sum(col.bit_count() for col in self.columns)
        return ones / (self.n_rows * self.n_attrs)

    def __len__(self) -> int:
        return self.n_rows


def _read_text(source: str | bytes | IO) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def parse_fimi(text: str) -> BinaryDataset:
    """One transaction per line, whitespace separated non-negative item ids.

    When some id below the maximum never occurs, ids are renumbered densely and
    the original ids become the attribute names.
    """
    lines = text.splitlines()
    if not lines or not text.strip():
        raise DatasetError("empty input")
    transactions = []
    for lineno, line in enumerate(lines, start=1):
        items = []
        for token in line.split():
            try:
                item = int(token)
            except ValueError:
                raise DatasetError(f"line {lineno}: bad item id {token!r}") from None
            if item < 0:
                raise DatasetError(f"line {lineno}: negative item id {item}")
            items.append(item)
        transactions.append(items)

    used = sorted({i for t in transactions for i in t})
    if not used:
        raise DatasetError("input contains no items")
    if len(used) == used[-1] + 1:
        remap = None
        n_attrs = len(used)
        names: tuple[str, ...] = ()
    else:
        remap = {item: k for k, item in enumerate(used)}
        n_attrs = len(used)
        names = tuple(str(item) for item in used)

    columns = [0] * n_attrs
    for r, items in enumerate(transactions):
        bit = 1 << r
        for item in items:
            columns[remap[item] if remap else item] |= bit
    return BinaryDataset(len(transactions), tuple(columns), names)


def parse_csv01(text: str) -> BinaryDataset:
    """Header row of attribute names followed by rows of 0/1 cells."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("empty input") from None
    header = [h.strip() for h in header]
    if not header or header == [""]:
        raise DatasetError("empty input")
    columns = [0] * len(header)
    n_rows = 0
    for lineno, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise DatasetError(f"line {lineno}: expected {len(header)} cells, got {len(cells)}")
        bit = 1 << n_rows
        for k, cell in enumerate(cells):
            cell = cell.strip()
            if cell == "1":
                columns[k] |= bit
            elif cell != "0":
                raise DatasetError(f"line {lineno}: value {cell!r} is not 0 or 1")
        n_rows += 1
    if n_rows == 0:
        raise DatasetError("input has a header but no rows")
    return BinaryDataset(n_rows, tuple(columns), tuple(header))


def load(source: str | bytes | IO, format: str = "fimi") -> BinaryDataset:
    text = _read_text(source)
    if format == "fimi":
        return parse_fimi(text)
    if format == "csv01":
        return parse_csv01(text)
    raise DatasetError(f"unknown format {format!r}")


def load_path(path: str, format: str | None = None) -> BinaryDataset:
    if format is None:
        format = "csv01" if str(path).endswith(".csv") else "fimi"
    with open(path, "rb") as fh:
        return load(fh, format)


def to_fimi(ds: BinaryDataset) -> str:
    lines = []
    for row in ds.to_matrix():
        lines.append(" ".join(str(k) for k in np.flatnonzero(row)))
    return "\n".join(lines) + "\n"


def to_csv01(ds: BinaryDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ds.attr_names)
    for row in ds.to_matrix():
        writer.writerow([int(v) for v in row])
    return buf.getvalue()
