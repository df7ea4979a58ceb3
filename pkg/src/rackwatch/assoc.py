"""Sparse associative arrays: string-keyed 2-D maps with matrix-style algebra.

Used to correlate telemetry dimensions (jobs x nodes, nodes x sensors).
Values are 64-bit floats; entries with value 0.0 are never stored, so the
stored key set is exactly the nonzero support.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Iterator, Mapping


class TripleError(ValueError):
    """Raised when a construction triple carries a non-finite value."""


class RangeError(ValueError):
    """Raised for an inverted selection interval."""


KeyRange = object  # None (all) | (lo, hi) inclusive interval | set/sequence of keys


def _in_range(key: str, selector) -> bool:
    if selector is None:
        return True
    if isinstance(selector, tuple) and len(selector) == 2:
        lo, hi = selector
        return lo <= key <= hi
    return key in selector


def _check_range(selector, which: str) -> object:
    if selector is None:
        return None
    if isinstance(selector, tuple) and len(selector) == 2:
        lo, hi = selector
        if not (isinstance(lo, str) and isinstance(hi, str)):
            raise RangeError(f"{which} interval bounds must be strings")
        if lo > hi:
            raise RangeError(f"inverted {which} interval: {lo!r} > {hi!r}")
        return selector
    return frozenset(selector)


class AssociativeArray:
    """Immutable sparse map from (row-key, col-key) to a nonzero float.

    Iteration is deterministic: lexicographic by row key, then col key.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[tuple[str, str], float]):
        clean = {}
        for (r, c), v in entries.items():
            v = float(v)
            if v != 0.0:
                clean[(r, c)] = v
        self._entries = dict(sorted(clean.items()))

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[str, str, float]]) -> "AssociativeArray":
        """Build from (row, col, value) triples; duplicate keys are summed."""
        acc: dict[tuple[str, str], float] = {}
        for row, col, value in triples:
            value = float(value)
            if not math.isfinite(value):
                raise TripleError(f"non-finite value in triple ({row!r}, {col!r}, {value!r})")
            key = (row, col)
            acc[key] = acc.get(key, 0.0) + value
        return cls(acc)

    @classmethod
    def empty(cls) -> "AssociativeArray":
        return cls({})

    def items(self) -> Iterator[tuple[tuple[str, str], float]]:
        return iter(self._entries.items())

    def triples(self) -> list[tuple[str, str, float]]:
        return [(r, c, v) for (r, c), v in self._entries.items()]

    def get(self, row: str, col: str, default: float = 0.0) -> float:
        return self._entries.get((row, col), default)

    def row_keys(self) -> list[str]:
        return sorted({r for r, _ in self._entries})

    def col_keys(self) -> list[str]:
        return sorted({c for _, c in self._entries})

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AssociativeArray):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __repr__(self) -> str:
        return f"AssociativeArray({len(self._entries)} entries)"

    # -- algebra ---------------------------------------------------------

    def add(self, other: "AssociativeArray") -> "AssociativeArray":
        """Elementwise sum over the union of key pairs."""
        acc = dict(self._entries)
        for key, v in other._entries.items():
            acc[key] = acc.get(key, 0.0) + v
        return AssociativeArray(acc)

    def matmul(self, other: "AssociativeArray") -> "AssociativeArray":
        """Plus-times product: our columns are matched against their rows."""
        by_row: dict[str, list[tuple[str, float]]] = {}
        for (r, c), v in other._entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc: dict[tuple[str, str], float] = {}
        for (r, k), v in self._entries.items():
            for c, w in by_row.get(k, ()):
                key = (r, c)
                acc[key] = acc.get(key, 0.0) + v * w
        return AssociativeArray(acc)

    def transpose(self) -> "AssociativeArray":
        return AssociativeArray({(c, r): v for (r, c), v in self._entries.items()})

    def select(self, row_range: KeyRange = None, col_range: KeyRange = None) -> "AssociativeArray":
        """Entries whose keys fall in both selectors (inclusive intervals)."""
        rows = _check_range(row_range, "row")
        cols = _check_range(col_range, "col")
        return AssociativeArray(
            {
                (r, c): v
                for (r, c), v in self._entries.items()
                if _in_range(r, rows) and _in_range(c, cols)
            }
        )

    # -- CSV triple interchange ------------------------------------------

    def to_csv(self) -> str:
        """Serialize as `row,col,value` lines with standard CSV quoting."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for (r, c), v in self._entries.items():
            writer.writerow([r, c, repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "AssociativeArray":
        triples = []
        for rec in csv.reader(io.StringIO(text)):
            if not rec:
                continue
            if len(rec) != 3:
                raise TripleError(f"expected 3 CSV fields, got {len(rec)}: {rec!r}")
            triples.append((rec[0], rec[1], float(rec[2])))
        return cls.from_triples(triples)


def from_triples(triples: Iterable[tuple[str, str, float]]) -> AssociativeArray:
    return AssociativeArray.from_triples(triples)


def elementwise_add(a: AssociativeArray, b: AssociativeArray) -> AssociativeArray:
    return a.add(b)


def matmul(a: AssociativeArray, b: AssociativeArray) -> AssociativeArray:
    return a.matmul(b)


def transpose(a: AssociativeArray) -> AssociativeArray:
    return a.transpose()


def select(a: AssociativeArray, row_range: KeyRange = None, col_range: KeyRange = None) -> AssociativeArray:
    return a.select(row_range, col_range)
