"""Experiment drivers: sum-rate gaps over sampled channels and region tables."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .channel import ChannelSpec, sample_channel
from .inner import SCHEMES, build_baseline_lp, build_inner_general_lp, build_inner_strong_lp
from .lp import LinearProgram, LpError, RatePoint, maximize_weighted, solve, sweep_boundary
from .outer import build_outer_lp

log = logging.getLogger(__name__)

GAP_MODES = {"strong-relaying": ("strong-relaying", 2), "arbitrary": ("none", 3)}
ZERO_CAPACITY = 1e-9
GAP_THRESHOLDS = (8e-4, 4e-4)

BOUNDS = ("outer", "inner-strong", "inner-general") + SCHEMES
REGION_ALL = ("outer", "inner-strong") + SCHEMES


def build_bound_lp(bound: str, ch: ChannelSpec) -> LinearProgram:
    if bound == "outer":
        return build_outer_lp(ch)
    if bound == "inner-strong":
        return build_inner_strong_lp(ch)
    if bound == "inner-general":
        return build_inner_general_lp(ch)
    if bound in SCHEMES:
        return build_baseline_lp(bound, ch)
    raise ValueError(f"unknown bound {bound!r}; choose from {', '.join(BOUNDS)}")


def parse_mode(mode: str) -> str:
    # accept the long forms "strong-relaying+prop2" and "arbitrary+prop3"
    base = mode.split("+")[0]
    if base not in GAP_MODES or (mode != base and mode != f"{base}+prop{GAP_MODES[base][1]}"):
        raise ValueError(f"unknown gap mode {mode!r}")
    return base


@dataclass(frozen=True)
class GapRecord:
    index: int
    channel: dict
    rsum_outer: float
    rsum_inner: float

    @property
    def gap(self) -> float:
        return (self.rsum_outer - self.rsum_inner) / self.rsum_outer


def gap_for_channel(ch: ChannelSpec, prop: int, solver: Callable = solve) -> tuple[float, float]:
    """Max sum rate of the outer bound and of the matching inner bound."""
    outer = maximize_weighted(build_outer_lp(ch), 1.0, 1.0, solver).objective
    inner_lp = build_inner_strong_lp(ch) if prop == 2 else build_inner_general_lp(ch)
    inner = maximize_weighted(inner_lp, 1.0, 1.0, solver).objective
    return outer, inner


def sample_seeds(seed: int, samples: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(samples)


def _gap_task(args) -> tuple[int, GapRecord | None, str | None]:
    index, seq, mode, sampling = args
    constraint, prop = GAP_MODES[mode]
    try:
        ch = sample_channel(np.random.default_rng(seq), sampling, constraint)
        outer, inner = gap_for_channel(ch, prop)
    except (LpError, ValueError) as exc:
        return index, None, f"sample {index} skipped: {exc}"
    if outer < ZERO_CAPACITY:
        return index, None, f"sample {index} excluded: zero outer sum rate"
    return index, GapRecord(index, ch.to_document(), outer, inner), None


def gap_records(
    samples: int, mode: str, seed: int, sampling: str = "uniform-independent", workers: int = 1
) -> list[GapRecord]:
    """Gap records ordered by sample index; skipped samples are logged."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    mode = parse_mode(mode)
    tasks = [(i, seq, mode, sampling) for i, seq in enumerate(sample_seeds(seed, samples))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_gap_task, tasks, chunksize=16))
    else:
        results = [_gap_task(t) for t in tasks]
    out = []
    for index, rec, msg in sorted(results, key=lambda r: r[0]):
        if msg:
            log.warning(msg)
        if rec is not None:
            out.append(rec)
    return out


def gap_fractions(gaps: Sequence[float], thresholds: Iterable[float] = GAP_THRESHOLDS) -> dict[float, float]:
    g = np.asarray(gaps, dtype=float)
    if g.size == 0:
        return {t: float("nan") for t in thresholds}
    return {t: float(np.mean(g < t)) for t in thresholds}


def gap_csv(records: Sequence[GapRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "gap"])
    for rec in records:
        w.writerow([rec.index, repr(rec.gap)])
    return buf.getvalue()


def gap_summary(records: Sequence[GapRecord], samples: int) -> str:
    gaps = [r.gap for r in records]
    fr = gap_fractions(gaps)
    lines = [f"samples {samples}", f"used {len(gaps)}"]
    lines += [f"fraction_below_{t * 100:.2f}% {fr[t]:.6f}" for t in GAP_THRESHOLDS]
    if gaps:
        q = np.quantile(gaps, [0.5, 0.8, 0.9, 0.99])
        lines.append("quantiles_50_80_90_99 " + " ".join(f"{v:.6g}" for v in q))
    return "\n".join(lines)


def region_points(bound: str, ch: ChannelSpec, weights: Sequence[tuple[float, float]], solver=solve) -> list[RatePoint]:
    return sweep_boundary(build_bound_lp(bound, ch), weights, solver)


def region_csv(curves: dict[str, list[RatePoint]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bound", "w1", "w2", "R1", "R2"])
    for bound, pts in curves.items():
        for p in pts:
            w.writerow([bound, repr(p.w1), repr(p.w2), repr(p.R1), repr(p.R2)])
    return buf.getvalue()


def parse_region_csv(text: str) -> dict[str, list[tuple[float, float, float, float]]]:
    out: dict[str, list[tuple[float, float, float, float]]] = {}
    for row in csv.DictReader(io.StringIO(text)):
        out.setdefault(row["bound"], []).append(tuple(float(row[k]) for k in ("w1", "w2", "R1", "R2")))
    return out

