"""Achievability LPs: the strong-relaying queueing scheme, its general
extension with self-mixing and source-mimicked relay operations, and the six
baseline schemes.

Variable names follow the operations: ``s_uc1`` (source, uncoded, flow 1),
``s_dxp1`` for the parenthesised ``s_dx^(1)``, ``r_dxb1`` for the bracketed
``r_dx^[1]``, ``s_sx1_2`` for self-mix operation 2 of flow 1, and ``ws_*`` /
``wr_*`` for relay-type operations performed by the source / the relay.

Every inequality has the form "insertions into a queue >= removals from it".
"""

from __future__ import annotations

from typing import Callable, Sequence

from .channel import ChannelSpec
from .lp import LinearProgram, RatePoint, maximize_weighted, solve, sweep_boundary

PAIRS = ((1, 2), (2, 1))

S_VARS_STRONG = tuple(
    [f"s_{op}{k}" for op in ("uc", "pm", "am", "rc", "dx", "dxp") for k in (1, 2)]
    + [f"s_cx{l}" for l in range(1, 9)]
)
R_OPS = ("uc1", "uc2", "dxp1", "dxp2", "dxb1", "dxb2", "rc", "ox", "cx")
R_VARS_STRONG = tuple(f"r_{op}" for op in R_OPS)
SX_VARS = tuple(f"s_sx{k}_{l}" for k in (1, 2) for l in (1, 2, 3))


def w_vars(h: str) -> tuple[str, ...]:
    return tuple(f"w{h}_{op}" for op in R_OPS)


STRONG_VARS = ("t_s", "t_r") + S_VARS_STRONG + R_VARS_STRONG
GENERAL_VARS = ("t_s", "t_r") + S_VARS_STRONG + SX_VARS + w_vars("s") + w_vars("r")


class _Acc(dict):
    """Coefficient accumulator: ``acc.add(names, coef)``."""

    def add(self, names: str | Sequence[str], coef: float) -> "_Acc":
        if isinstance(names, str):
            names = (names,)
        for v in names:
            self[v] = self.get(v, 0.0) + coef
        return self

    def minus(self, other: "_Acc") -> dict[str, float]:
        out = dict(self)
        for v, c in other.items():
            out[v] = out.get(v, 0.0) - c
        return out


def _build(ch: ChannelSpec, general: bool, literal_d: bool, name: str) -> LinearProgram:
    lp = LinearProgram(name=name)
    for v in GENERAL_VARS if general else STRONG_VARS:
        lp.var(v)
    lp.var("R1")
    lp.var("R2")

    def ps(*terms: str) -> float:
        return ch.p("s", *terms)

    def pr(*terms: str) -> float:
        return ch.p("r", *terms)

    # relay-type operations: (name, PEC) pairs for each performer
    if general:
        performers = [("ws_", ps), ("wr_", pr)]
    else:
        performers = [("r_", pr)]

    def rel(op: str) -> list[tuple[str, Callable[..., float]]]:
        return [(prefix + op, p) for prefix, p in performers]

    s_ops = list(S_VARS_STRONG) + (list(SX_VARS) + list(w_vars("s")) if general else [])
    r_ops = list(w_vars("r")) if general else list(R_VARS_STRONG)
    lp.add({"t_s": 1.0, "t_r": 1.0}, "<=", 1.0, name="TS1")
    lp.add({"t_s": -1.0, **{v: 1.0 for v in s_ops}}, "<=", 0.0, name="TS2")
    lp.add({"t_r": -1.0, **{v: 1.0 for v in r_ops}}, "<=", 0.0, name="TS3")

    for i, j in PAIRS:
        di, dj = f"d{i}", f"d{j}"
        lp.add(
            {f"R{i}": -1.0, f"s_uc{i}": ps(di, dj, "r"), f"s_pm{i}": ps(di, dj, "r")},
            "<=", 0.0, name=f"E{i}",
        )

    for i, j in PAIRS:
        di, dj = f"d{i}", f"d{j}"
        only_r = ps(f"~{di} ~{dj} r")
        ins = _Acc().add([f"s_uc{i}", f"s_pm{i}"], only_r)
        out = _Acc().add([f"s_pm{j}", f"s_am{i}"], ps(di, dj))
        for v, p in rel(f"uc{i}"):
            out.add(v, p(di, dj))
        if general:
            out.add([f"s_sx{i}_1", f"s_sx{i}_2"], ps(di, dj))
        lp.add(out.minus(ins), "<=", 0.0, name=f"A{i}")

        only_dj = ps(f"~{di} {dj} ~r")
        lp.add(
            {f"s_rc{i}": ps(di, dj, "r"), f"s_pm{i}": -only_dj}, "<=", 0.0, name=f"B{i}"
        )

    ins = (
        _Acc()
        .add("s_pm1", ps("d1", "d2 r"))
        .add("s_pm2", ps("d2", "d1 r"))
        .add("s_am1", ps("~d1 d2"))
        .add("s_am2", ps("d1 ~d2"))
        .add(["s_rc1", "s_rc2"], ps("~d1 ~d2 r"))
    )
    out = _Acc()
    for v, p in rel("rc"):
        out.add(v, p("d1", "d2"))
    lp.add(out.minus(ins), "<=", 0.0, name="M")

    for i, j in PAIRS:
        di, dj = f"d{i}", f"d{j}"
        only_dj = ps(f"~{di} {dj} ~r")
        p_dir = ps(di, "r")
        ins = _Acc().add([f"s_uc{i}", f"s_rc{i}"], only_dj)
        out = _Acc().add([f"s_am{j}", f"s_dx{i}", "s_cx1", f"s_cx{1 + i}", f"s_cx{4 + i}"], p_dir)
        if general:
            out.add([f"s_sx{i}_1", f"s_sx{i}_3"], p_dir)
        lp.add(out.minus(ins), "<=", 0.0, name=f"S{i}")

    for i, j in PAIRS:
        di, dj = f"d{i}", f"d{j}"
        p_dir = ps(di, "r")
        ins = _Acc().add(f"s_rc{j}", ps(f"~{di} {dj} ~r"))
        out = _Acc().add([f"s_dxp{i}", f"s_cx{1 + j}", "s_cx4", f"s_cx{6 + i}"], p_dir)
        for v, p in rel(f"dxp{i}"):
            out.add(v, p(di, dj))
        if general:
            ins.add(f"s_sx{i}_1", ps(f"{di} ~{dj} ~r"))
            out.add(f"s_sx{i}_2", ps(f"{di} {dj}", "r"))
            out.add(f"s_sx{i}_3", ps(f"{di} r", dj))
        lp.add(out.minus(ins), "<=", 0.0, name=f"T{i}")

    ins = _Acc().add([f"s_cx{l}" for l in range(1, 5)], ps("~d1 ~d2 r"))
    out = _Acc()
    for v, p in rel("ox"):
        out.add(v, p("d1", "d2"))
    lp.add(out.minus(ins), "<=", 0.0, name="X0")

    for i, j in PAIRS:
        di, dj = f"d{i}", f"d{j}"
        ins = _Acc().add(f"s_am{j}", ps(f"{di} {dj}", f"~{di} r"))
        ins.add([f"s_uc{i}", f"s_rc{i}", f"s_rc{j}"] + [f"s_cx{l}" for l in range(1, 5)], ps(f"~{di} {dj} r"))
        ins.add([f"s_cx{4 + i}", f"s_cx{6 + i}", f"s_dx{i}", f"s_dxp{i}"], ps(f"~{di} r"))
        if general:
            ins.add([f"s_sx{i}_{l}" for l in (1, 2, 3)], ps(dj) + ps("r") - ps(f"{di} {dj} r"))
        for op in (f"uc{i}", "rc", f"dxp{i}", "ox"):
            for v, p in rel(op):
                ins.add(v, p(f"~{di} {dj}"))
        out = _Acc().add([f"s_cx{7 - i}", f"s_cx{9 - i}"], ps(di))
        for op in ("cx", f"dxb{i}"):
            for v, p in rel(op):
                out.add(v, p(di))
        lp.add(out.minus(ins), "<=", 0.0, name=f"X{i}")

    for i, j in PAIRS:
        di = f"d{i}"
        am = f"s_am{j}" if literal_d else f"s_am{i}"
        ins = _Acc().add(
            [f"s_uc{i}", am, "s_rc1", "s_rc2", f"s_dx{i}", f"s_dxp{i}"] + [f"s_cx{l}" for l in range(1, 9)],
            ps(di),
        )
        if general:
            ins.add([f"s_sx{i}_{l}" for l in (1, 2, 3)], ps(di))
        for op in (f"uc{i}", "rc", "ox", "cx", f"dxp{i}", f"dxb{i}"):
            for v, p in rel(op):
                ins.add(v, p(di))
        lp.add(_Acc({f"R{i}": 1.0}).minus(ins), "<=", 0.0, name=f"D{i}")
    return lp


def build_inner_strong_lp(ch: ChannelSpec, literal_d: bool = False) -> LinearProgram:
    """Strong-relaying scheme LP (objective unset).

    ``literal_d`` credits ``s_am^j`` instead of ``s_am^i`` in the decoded-queue
    rows, an alternative indexing that disagrees with the queue flow table.
    """
    return _build(ch, general=False, literal_d=literal_d, name="inner_strong")


def build_inner_general_lp(ch: ChannelSpec, literal_d: bool = False) -> LinearProgram:
    return _build(ch, general=True, literal_d=literal_d, name="inner_general")


def fix_zero(lp: LinearProgram, names: Sequence[str]) -> LinearProgram:
    """Hardwire variables to zero (an extra ``v <= 0`` row each)."""
    out = lp.copy()
    for v in names:
        out.add({v: 1.0}, "<=", 0.0, name=f"zero_{v}")
    return out


SCHEMES = (
    "scheme1", "scheme2", "scheme3", "scheme4", "scheme5", "scheme6",
)
SCHEME_TAGS = {
    "scheme1": "uncoded-no-relay",
    "scheme2": "bc-lnc-no-relay",
    "scheme3": "route-all-relay-uncoded",
    "scheme4": "route-all-relay-bclnc",
    "scheme5": "timeshare-intraflow",
    "scheme6": "butterfly-only",
}
_TAG_TO_SCHEME = {v: k for k, v in SCHEME_TAGS.items()}

SCHEME5_ZERO = (
    ["s_pm1", "s_pm2", "s_am1", "s_am2", "s_rc1", "s_rc2"]
    + [f"s_cx{l}" for l in range(1, 9)]
    + ["r_rc", "r_ox", "r_cx"]
)
SCHEME6_ZERO = ["s_pm1", "s_pm2", "s_am1", "s_am2", "s_rc1", "s_rc2", "r_rc"]
SCHEME6_STRICT_EXTRA = ["s_dx1", "s_dx2", "s_dxp1", "s_dxp2", "r_dxp1", "r_dxp2", "r_dxb1", "r_dxb2"]


def _rate_lp(rows: list[list[tuple[str, float]]], name: str) -> LinearProgram:
    """``sum R_k / p_k <= 1`` per row; a zero denominator pins that rate to 0."""
    lp = LinearProgram(name=name)
    lp.var("R1")
    lp.var("R2")
    pinned = set()
    for row in rows:
        coeffs: dict[str, float] = {}
        for v, p in row:
            if p <= 0.0:
                pinned.add(v)
            else:
                coeffs[v] = coeffs.get(v, 0.0) + 1.0 / p
        if coeffs:
            lp.add(coeffs, "<=", 1.0)
    for v in sorted(pinned):
        lp.add({v: 1.0}, "<=", 0.0, name=f"zero_{v}")
    return lp


def build_baseline_lp(tag: str, ch: ChannelSpec, butterfly_strict: bool = False) -> LinearProgram:
    scheme = _TAG_TO_SCHEME.get(tag, tag)
    ps = lambda *t: ch.p("s", *t)  # noqa: E731
    pr = lambda *t: ch.p("r", *t)  # noqa: E731
    if scheme == "scheme1":
        return _rate_lp([[("R1", ps("d1")), ("R2", ps("d2"))]], scheme)
    if scheme == "scheme2":
        return _rate_lp(
            [
                [("R1", ps("d1")), ("R2", ps("d1", "d2"))],
                [("R1", ps("d1", "d2")), ("R2", ps("d2"))],
            ],
            scheme,
        )
    if scheme == "scheme3":
        relay = ps("r")
        return _rate_lp([[("R1", pr("d1")), ("R2", pr("d2")), ("R1", relay), ("R2", relay)]], scheme)
    if scheme == "scheme4":
        relay = ps("r")
        return _rate_lp(
            [
                [("R1", pr("d1")), ("R2", pr("d1", "d2")), ("R1", relay), ("R2", relay)],
                [("R1", pr("d1", "d2")), ("R2", pr("d2")), ("R1", relay), ("R2", relay)],
            ],
            scheme,
        )
    if scheme == "scheme5":
        lp = fix_zero(build_inner_strong_lp(ch), SCHEME5_ZERO)
        lp.name = scheme
        return lp
    if scheme == "scheme6":
        zero = SCHEME6_ZERO + (SCHEME6_STRICT_EXTRA if butterfly_strict else [])
        lp = fix_zero(build_inner_strong_lp(ch), zero)
        lp.name = scheme
        return lp
    raise ValueError(f"unknown baseline scheme {tag!r}")


def inner_strong_region(ch: ChannelSpec, weights, solver=solve) -> list[RatePoint]:
    return sweep_boundary(build_inner_strong_lp(ch), weights, solver)


def inner_general_region(ch: ChannelSpec, weights, solver=solve) -> list[RatePoint]:
    return sweep_boundary(build_inner_general_lp(ch), weights, solver)


def baseline_region(tag: str, ch: ChannelSpec, weights=((1.0, 0.0), (1.0, 1.0), (0.0, 1.0)), **kw) -> list[RatePoint]:
    return sweep_boundary(build_baseline_lp(tag, ch, **kw), weights)


def inner_max(ch: ChannelSpec, general: bool = False, weights=(1.0, 1.0), solver=solve) -> RatePoint:
    lp = build_inner_general_lp(ch) if general else build_inner_strong_lp(ch)
    return maximize_weighted(lp, weights[0], weights[1], solver)
