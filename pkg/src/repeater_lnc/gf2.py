"""GF(2) vectors and subspaces with Python ints as bitsets.

Bit ``i`` of an int is coordinate ``i`` of the vector.  A subspace keeps its
basis in fully reduced row-echelon form keyed by pivot (highest set bit), so
membership costs one XOR per pivot hit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


class DimensionError(ValueError):
    pass


def unit(i: int) -> int:
    return 1 << i


def vec(coords: Iterable[int]) -> int:
    """Vector with ones at ``coords`` (repeats cancel, as over GF(2))."""
    out = 0
    for c in coords:
        out ^= 1 << c
    return out


def bits(x: int) -> Iterator[int]:
    """Set coordinates of ``x``, highest first."""
    while x:
        b = x.bit_length() - 1
        yield b
        x ^= 1 << b


def weight(x: int) -> int:
    return x.bit_count()


def _check(dim: int, v: int) -> None:
    if v < 0 or v.bit_length() > dim:
        raise DimensionError(f"vector does not fit in dimension {dim}")


def _reduce(rows: dict[int, int], v: int) -> int:
    # rows are fully reduced, so only pivots present in v itself matter
    out = v
    for b in bits(v):
        row = rows.get(b)
        if row is not None:
            out ^= row
    return out


@dataclass(frozen=True)
class Gf2Subspace:
    """Immutable subspace of GF(2)^dim."""

    dim: int
    rows: tuple[int, ...] = ()

    @classmethod
    def zero(cls, dim: int) -> "Gf2Subspace":
        return cls(dim, ())

    @classmethod
    def span(cls, dim: int, vectors: Iterable[int]) -> "Gf2Subspace":
        sp = _Builder(dim)
        for v in vectors:
            _check(dim, v)
            sp.add(v)
        return sp.freeze()

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _table(self) -> dict[int, int]:
        return {r.bit_length() - 1: r for r in self.rows}

    def contains(self, v: int) -> bool:
        _check(self.dim, v)
        return _reduce(self._table(), v) == 0

    __contains__ = contains

    def insert(self, v: int) -> tuple["Gf2Subspace", bool]:
        _check(self.dim, v)
        sp = _Builder(self.dim, self.rows)
        grew = sp.add(v)
        return (sp.freeze() if grew else self), grew

    def sum_space(self, other: "Gf2Subspace") -> "Gf2Subspace":
        if other.dim != self.dim:
            raise DimensionError(f"dimension {self.dim} vs {other.dim}")
        sp = _Builder(self.dim, self.rows)
        for r in other.rows:
            sp.add(r)
        return sp.freeze()

    __add__ = sum_space

    def elements(self) -> Iterator[int]:
        """All 2^rank members (small subspaces only)."""
        for mask in range(1 << self.rank):
            v = 0
            for k, r in enumerate(self.rows):
                if mask >> k & 1:
                    v ^= r
            yield v


def contains(sp: Gf2Subspace, v: int) -> bool:
    return sp.contains(v)


def sum_space(a: Gf2Subspace, b: Gf2Subspace) -> Gf2Subspace:
    return a.sum_space(b)


def insert(sp: Gf2Subspace, v: int) -> tuple[Gf2Subspace, bool]:
    return sp.insert(v)


def rank_of(vectors: Iterable[int]) -> int:
    sp = _Builder(None)
    for v in vectors:
        sp.add(v)
    return sp.rank


class _Builder:
    """Mutable reduced basis with a column index for fast back-substitution."""

    __slots__ = ("dim", "rows", "cols")

    def __init__(self, dim: int | None, rows: Iterable[int] = ()):
        self.dim = dim
        self.rows: dict[int, int] = {}
        # non-pivot column -> pivots of rows that have a one there
        self.cols: dict[int, set[int]] = {}
        for r in rows:
            self.add(r)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: int) -> int:
        return _reduce(self.rows, v)

    def contains(self, v: int) -> bool:
        return _reduce(self.rows, v) == 0

    def add(self, v: int) -> bool:
        r = _reduce(self.rows, v)
        if r == 0:
            return False
        p = r.bit_length() - 1
        tail = r ^ (1 << p)
        tail_bits = list(bits(tail))
        cols = self.cols
        for q in cols.pop(p, ()):
            row = self.rows[q]
            for c in tail_bits:
                bucket = cols.setdefault(c, set())
                if row >> c & 1:
                    bucket.discard(q)
                else:
                    bucket.add(q)
            self.rows[q] = row ^ r
        self.rows[p] = r
        for c in tail_bits:
            cols.setdefault(c, set()).add(p)
        return True

    def freeze(self) -> Gf2Subspace:
        return Gf2Subspace(self.dim, tuple(self.rows[p] for p in sorted(self.rows, reverse=True)))


class KnowledgeSpace(_Builder):
    """Running span of a node's reception list plus its flagged coordinates."""

    __slots__ = ("flagged", "received")

    def __init__(self) -> None:
        super().__init__(None)
        self.flagged = 0
        self.received = 0

    def receive(self, v: int) -> bool:
        self.received += 1
        self.flagged |= v
        return self.add(v)

    def is_flagged(self, coord: int) -> bool:
        return bool(self.flagged >> coord & 1)

    def knows(self, v: int) -> bool:
        return _reduce(self.rows, v) == 0

    def freeze(self, dim: int | None = None) -> Gf2Subspace:
        sp = super().freeze()
        return Gf2Subspace(dim if dim is not None else sp.dim, sp.rows)


class SparseKnowledge:
    """Reduced basis over coordinate sets, for long vectors of small weight.

    Same scheme as ``_Builder`` but a vector is a ``frozenset`` of its set
    coordinates, so memory follows the weight rather than the dimension.
    """

    __slots__ = ("rows", "cols")

    def __init__(self) -> None:
        self.rows: dict[int, frozenset[int]] = {}
        self.cols: dict[int, set[int]] = {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: frozenset[int]) -> frozenset[int]:
        out = v
        rows = self.rows
        for b in v:
            row = rows.get(b)
            if row is not None:
                out = out ^ row
        return out

    def knows(self, v: frozenset[int]) -> bool:
        return not self.reduce(v)

    def add(self, v: frozenset[int]) -> bool:
        r = self.reduce(v)
        if not r:
            return False
        p = max(r)
        tail = r - {p}
        cols = self.cols
        rows = self.rows
        for q in cols.pop(p, ()):
            row = rows[q]
            for c in tail:
                bucket = cols.setdefault(c, set())
                if c in row:
                    bucket.discard(q)
                else:
                    bucket.add(q)
            rows[q] = row ^ r
        rows[p] = r
        for c in tail:
            cols.setdefault(c, set()).add(p)
        return True
