"""Coding types: membership patterns of a coding vector over 15 subspaces.

The 15 subspaces are sums of the three knowledge spaces ``S1, S2, Sr`` and
the two message spaces ``M1, M2``.  Subspace ``l`` (1-based) is generated by
``GENERATORS[l]``.  A coding type is the 15-bit pattern saying which of them
contain a vector; it is written with five digits (hex, octal, hex, octal,
binary) covering bits 1-4, 5-7, 8-11, 12-14 and 15.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gf2 import Gf2Subspace, DimensionError

_BASE = {
    1: {"S1"},
    2: {"S2"},
    3: {"S1", "M1"},
    4: {"S2", "M2"},
    5: {"S1", "S2"},
    6: {"S1", "S2", "M1"},
    7: {"S1", "S2", "M2"},
}
GENERATORS: dict[int, frozenset[str]] = {l: frozenset(g) for l, g in _BASE.items()}
GENERATORS.update({l + 7: frozenset(g | {"Sr"}) for l, g in _BASE.items()})
GENERATORS[15] = frozenset({"Sr"})

_DIGIT_SPANS = ((1, 4, 16), (5, 7, 8), (8, 11, 16), (12, 14, 8), (15, 15, 2))

# Reference lists of all feasible types and of the relay-feasible ones.
LAMBDA_REFERENCE = tuple("""
00000 00010 00020 00030 00070 00110 00130 00170 00220 00230 00270 00330 00370
00570 00770 00A70 00B70 00F70 00F71 01010 01030 01070 01110 01130 01170 01230
01270 01330 01370 01570 01770 01A70 01B70 01F70 01F71 02020 02030 02070 02130
02170 02220 02230 02270 02330 02370 02570 02770 02A70 02B70 02F70 02F71 03030
03070 03130 03170 03230 03270 03330 03370 03570 03770 03A70 03B70 03F70 03F71
07070 07170 07270 07370 07570 07770 07A70 07B70 07F70 07F71 11110 11130 11170
11330 11370 11570 11770 11B70 11F70 11F71 13130 13170 13330 13370 13570 13770
13B70 13F70 13F71 17170 17370 17570 17770 17B70 17F70 17F71 22220 22230 22270
22330 22370 22770 22A70 22B70 22F70 22F71 23230 23270 23330 23370 23770 23A70
23B70 23F70 23F71 27270 27370 27770 27A70 27B70 27F70 27F71 33330 33370 33770
33B70 33F70 33F71 37370 37770 37B70 37F70 37F71 57570 57770 57F70 57F71 77770
77F70 77F71 A7A70 A7B70 A7F70 A7F71 B7B70 B7F70 B7F71 F7F70 F7F71
""".split())

LAMBDA_R_REFERENCE = tuple("""
00F71 01F71 02F71 03F71 07F71 11F71 13F71 17F71 22F71 23F71 27F71 33F71 37F71
57F71 77F71 A7F71 B7F71 F7F71
""".split())


class TypeEncodingError(ValueError):
    pass


class FeasibilityMismatch(AssertionError):
    pass


@dataclass(frozen=True, order=True)
class CodingType:
    """Bit ``l`` (1-based) of ``mask`` lives at position ``l - 1``."""

    mask: int

    @classmethod
    def from_bits(cls, bits: "list[int] | tuple[int, ...]") -> "CodingType":
        if len(bits) != 15:
            raise TypeEncodingError("a coding type has 15 bits")
        return cls(sum(1 << i for i, b in enumerate(bits) if b))

    def bit(self, l: int) -> int:
        return self.mask >> (l - 1) & 1

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(self.bit(l) for l in range(1, 16))

    def encode(self) -> str:
        out = []
        for lo, hi, radix in _DIGIT_SPANS:
            val = 0
            for l in range(lo, hi + 1):
                val = val * 2 + self.bit(l)
            out.append(np.base_repr(val, radix))
        return "".join(out)

    @classmethod
    def decode(cls, text: str) -> "CodingType":
        if len(text) != 5:
            raise TypeEncodingError(f"type index {text!r} must have 5 digits")
        mask = 0
        for ch, (lo, hi, radix) in zip(text, _DIGIT_SPANS):
            try:
                val = int(ch, radix)
            except ValueError:
                raise TypeEncodingError(f"digit {ch!r} invalid in radix {radix}") from None
            width = hi - lo + 1
            for k in range(width):
                if val >> (width - 1 - k) & 1:
                    mask |= 1 << (lo + k - 1)
        return cls(mask)

    def __str__(self) -> str:
        return self.encode()


def encode_type(t: CodingType) -> str:
    return t.encode()


def decode_type(s: str) -> CodingType:
    return CodingType.decode(s)


@lru_cache(maxsize=None)
def containment_lattice() -> frozenset[tuple[int, int]]:
    """Pairs ``(l, m)`` with subspace l inside subspace m for every context."""
    return frozenset(
        (l, m) for l in GENERATORS for m in GENERATORS if GENERATORS[l] <= GENERATORS[m]
    )


def is_upward_closed(t: CodingType) -> bool:
    return all(not t.bit(l) or t.bit(m) for l, m in containment_lattice())


def derive_feasible() -> list[CodingType]:
    """All upward-closed 15-bit patterns, sorted by their encoding."""
    found = [CodingType(m) for m in range(1 << 15) if is_upward_closed(CodingType(m))]
    return sorted(found, key=CodingType.encode)


def discrepancy() -> tuple[set[str], set[str]]:
    """(derived but not listed, listed but not derived)."""
    derived = {t.encode() for t in derive_feasible()}
    listed = set(LAMBDA_REFERENCE)
    return derived - listed, listed - derived


def enumerate_feasible() -> tuple[list[CodingType], list[CodingType]]:
    """Feasible types and relay-feasible types (those containing the relay space)."""
    extra, missing = discrepancy()
    if extra or missing:
        raise FeasibilityMismatch(f"derived-only {sorted(extra)}, listed-only {sorted(missing)}")
    lam = [CodingType.decode(s) for s in sorted(LAMBDA_REFERENCE)]
    lam_r = [t for t in lam if t.bit(15)]
    got = [t.encode() for t in lam_r]
    if got != sorted(LAMBDA_R_REFERENCE):
        raise FeasibilityMismatch(f"relay list mismatch: {got}")
    return lam, lam_r


@lru_cache(maxsize=1)
def feasible_types() -> tuple[tuple[CodingType, ...], tuple[CodingType, ...]]:
    lam, lam_r = enumerate_feasible()
    return tuple(lam), tuple(lam_r)


@dataclass(frozen=True)
class SubspaceContext:
    """Knowledge spaces of d1, d2, r inside GF(2)^(n1+n2).

    Coordinates ``0..n1-1`` belong to flow 1 and ``n1..n1+n2-1`` to flow 2.
    """

    s1: Gf2Subspace
    s2: Gf2Subspace
    sr: Gf2Subspace
    n1: int
    n2: int

    def __post_init__(self) -> None:
        dim = self.n1 + self.n2
        for sp in (self.s1, self.s2, self.sr):
            if sp.dim != dim:
                raise DimensionError(f"subspace dimension {sp.dim} != {dim}")

    @property
    def dim(self) -> int:
        return self.n1 + self.n2

    def message_space(self, k: int) -> Gf2Subspace:
        lo, hi = (0, self.n1) if k == 1 else (self.n1, self.dim)
        return Gf2Subspace.span(self.dim, (1 << i for i in range(lo, hi)))

    def a_subspaces(self) -> dict[int, Gf2Subspace]:
        parts = {"S1": self.s1, "S2": self.s2, "Sr": self.sr, "M1": self.message_space(1), "M2": self.message_space(2)}
        out = {}
        for l, gens in GENERATORS.items():
            sp = Gf2Subspace.zero(self.dim)
            for g in sorted(gens):
                sp = sp + parts[g]
            out[l] = sp
        return out


def classify_vector(ctx: SubspaceContext, c: int, _cache: dict | None = None) -> CodingType:
    subspaces = ctx.a_subspaces() if _cache is None else _cache
    return CodingType(sum(1 << (l - 1) for l, sp in subspaces.items() if sp.contains(c)))


def feasibility_witness_oracle(
    trials: int, dims: tuple[int, int] = (4, 4), seed: int = 0, chunk: int = 4096
) -> set[CodingType]:
    """Types of non-empty cells seen over random (S1, S2, Sr) triples.

    Each trial draws three subspaces spanned by ``k`` uniform random vectors
    with ``k`` uniform on ``0..n1+n2`` and classifies every vector of the
    space exhaustively.  All trials of a chunk run at once: a subspace is a
    boolean membership table over the 2^dim vectors, and adding a generator
    ``g`` maps the table ``m`` to ``m | m[x ^ g]``.
    """
    n1, n2 = dims
    dim = n1 + n2
    if dim > 12:
        raise ValueError("exhaustive classification limited to dim <= 12")
    size = 1 << dim
    rng = np.random.default_rng(seed)
    idx = np.arange(size)
    seen = np.zeros(1 << 15, dtype=bool)
    m_gens = {"M1": [1 << i for i in range(n1)], "M2": [1 << (n1 + i) for i in range(n2)]}

    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        done += t
        rows = np.arange(t)[:, None]

        def draw() -> np.ndarray:
            k = rng.integers(0, dim + 1, t)
            g = rng.integers(0, size, (t, dim))
            g[np.arange(dim)[None, :] >= k[:, None]] = 0
            return g

        random_gens = {"S1": draw(), "S2": draw(), "Sr": draw()}

        def extend(table: np.ndarray, name: str) -> np.ndarray:
            if name in m_gens:
                for c in m_gens[name]:
                    table = table | table[:, idx ^ c]
            else:
                g = random_gens[name]
                for j in range(dim):
                    table = table | table[rows, idx[None, :] ^ g[:, j : j + 1]]
            return table

        zero = np.zeros((t, size), dtype=bool)
        zero[:, 0] = True
        # build each subspace from a smaller one that it contains
        order = sorted(GENERATORS, key=lambda l: len(GENERATORS[l]))
        tables: dict[int, np.ndarray] = {}
        for l in order:
            gens = GENERATORS[l]
            parent = max(
                (m for m in tables if GENERATORS[m] < gens),
                key=lambda m: len(GENERATORS[m]),
                default=None,
            )
            table = zero if parent is None else tables[parent]
            have = set() if parent is None else GENERATORS[parent]
            for g in sorted(gens - have):
                table = extend(table, g)
            tables[l] = table
        code = np.zeros((t, size), dtype=np.int32)
        for l, table in tables.items():
            code |= table.astype(np.int32) << (l - 1)
        seen[np.unique(code)] = True
    return {CodingType(int(m)) for m in np.flatnonzero(seen)}
