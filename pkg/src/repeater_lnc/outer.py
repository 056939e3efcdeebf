"""LNC capacity outer bound as a linear program over coding-type frequencies.

Variables: the fraction of slots in which the source (resp. relay) sends a
vector of each feasible type, the 14 final expected ranks ``y1..y14`` of the
first fourteen subspaces normalized by ``n``, and the rates.  Row ``l`` says
that the rank of subspace ``l`` grows by one whenever a vector outside it
reaches one of the nodes whose knowledge generates it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .channel import ChannelSpec
from .coding_types import CodingType, feasible_types
from .lp import LinearProgram, RatePoint, solve, sweep_boundary, maximize_weighted


@dataclass(frozen=True)
class RankConversionRow:
    l: int
    s_terms: tuple[str, ...]
    r_terms: tuple[str, ...] | None
    offset: str | None  # "R1", "R2" or None


def _rows() -> tuple[RankConversionRow, ...]:
    s_args = {1: ("d1",), 2: ("d2",), 3: ("d1",), 4: ("d2",), 5: ("d1", "d2"), 6: ("d1", "d2"), 7: ("d1", "d2")}
    offsets = {3: "R1", 4: "R2", 6: "R1", 7: "R2"}
    out = []
    for l in range(1, 8):
        out.append(RankConversionRow(l, s_args[l], s_args[l], offsets.get(l)))
    for l in range(1, 8):
        out.append(RankConversionRow(l + 7, s_args[l] + ("r",), None, offsets.get(l)))
    return tuple(out)


RANK_ROWS = _rows()


def xs_name(t: CodingType) -> str:
    return f"xs_{t.encode()}"


def xr_name(t: CodingType) -> str:
    return f"xr_{t.encode()}"


def build_outer_lp(ch: ChannelSpec, literal_pairing: bool = False) -> LinearProgram:
    """Outer-bound LP; the objective is left empty for the caller to set.

    ``literal_pairing`` ties ``y8 = y11`` instead of ``y8 = y10``. That variant
    is not a valid bound and is kept only for comparison.
    """
    lam, lam_r = feasible_types()
    lp = LinearProgram(name="outer")
    for t in lam:
        lp.var(xs_name(t))
    for t in lam_r:
        lp.var(xr_name(t))
    for l in range(1, 15):
        lp.var(f"y{l}")
    lp.var("R1")
    lp.var("R2")

    ts = {xs_name(t): 1.0 for t in lam}
    ts.update({xr_name(t): 1.0 for t in lam_r})
    lp.add(ts, "<=", 1.0, name="time_sharing")

    for row in RANK_ROWS:
        ps = ch.p("s", *row.s_terms)
        coeffs: dict[str, float] = {f"y{row.l}": 1.0}
        for t in lam:
            if not t.bit(row.l):
                coeffs[xs_name(t)] = coeffs.get(xs_name(t), 0.0) - ps
        if row.r_terms is not None:
            pr = ch.p("r", *row.r_terms)
            for t in lam_r:
                if not t.bit(row.l):
                    coeffs[xr_name(t)] = -pr
        if row.offset:
            coeffs[row.offset] = -1.0
        lp.add(coeffs, "=", 0.0, name=f"rank{row.l}")

    pairs = [(1, 3), (2, 4), (8, 11 if literal_pairing else 10), (9, 11)]
    for a, b in pairs:
        lp.add({f"y{a}": 1.0, f"y{b}": -1.0}, "=", 0.0, name=f"dec_y{a}_y{b}")
    for l in (5, 6, 7, 12, 13, 14):
        lp.add({f"y{l}": 1.0, "R1": -1.0, "R2": -1.0}, "=", 0.0, name=f"dec_y{l}_sum")
    return lp


def outer_max(ch: ChannelSpec, weights: tuple[float, float] = (1.0, 1.0), solver=solve, **kw) -> RatePoint:
    return maximize_weighted(build_outer_lp(ch, **kw), weights[0], weights[1], solver)


def outer_region(ch: ChannelSpec, weights, solver=solve, **kw) -> list[RatePoint]:
    return sweep_boundary(build_outer_lp(ch, **kw), weights, solver)
