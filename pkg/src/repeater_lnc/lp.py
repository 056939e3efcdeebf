"""Small dense linear programs and a two-phase primal simplex (Bland's rule).

Every variable is non-negative.  Constraints are ``<=``, ``>=`` or ``=``;
``>=`` rows are stored negated as ``<=``.  The objective is maximized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

PIVOT_TOL = 1e-10
# smallest admissible pivot element; tinier ones make the basis ill-conditioned
PIVOT_FLOOR = 1e-9
FEAS_TOL = 1e-9
RESIDUAL_LIMIT = 1e-7
MAX_PIVOTS = 200_000


class LpError(RuntimeError):
    pass


class LpNumericalError(LpError):
    pass


@dataclass
class Constraint:
    coeffs: dict[str, float]
    rel: str  # "<=" or "="
    rhs: float
    name: str = ""


@dataclass
class LinearProgram:
    variables: list[str] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    name: str = "lp"

    def __post_init__(self) -> None:
        self._index = {v: i for i, v in enumerate(self.variables)}

    def var(self, name: str) -> str:
        if name not in self._index:
            self._index[name] = len(self.variables)
            self.variables.append(name)
        return name

    def add(self, coeffs: Mapping[str, float], rel: str, rhs: float = 0.0, name: str = "") -> Constraint:
        merged: dict[str, float] = {}
        for v, c in coeffs.items():
            if v not in self._index:
                raise LpError(f"constraint {name!r} uses undeclared variable {v!r}")
            merged[v] = merged.get(v, 0.0) + float(c)
        if rel == ">=":
            merged = {v: -c for v, c in merged.items()}
            rhs = -rhs
            rel = "<="
        if rel not in ("<=", "="):
            raise LpError(f"unknown relation {rel!r}")
        con = Constraint(merged, rel, float(rhs), name)
        self.constraints.append(con)
        return con

    def maximize(self, coeffs: Mapping[str, float]) -> None:
        for v in coeffs:
            if v not in self._index:
                raise LpError(f"objective uses undeclared variable {v!r}")
        self.objective = {v: float(c) for v, c in coeffs.items()}

    def index(self, name: str) -> int:
        return self._index[name]

    def copy(self) -> "LinearProgram":
        lp = LinearProgram(list(self.variables), [], dict(self.objective), self.name)
        lp.constraints = [Constraint(dict(c.coeffs), c.rel, c.rhs, c.name) for c in self.constraints]
        return lp

    def matrices(self) -> tuple[np.ndarray, np.ndarray, list[str], np.ndarray]:
        """Dense ``(A, b, rels, c)``."""
        n = len(self.variables)
        A = np.zeros((len(self.constraints), n))
        b = np.zeros(len(self.constraints))
        rels = []
        for i, con in enumerate(self.constraints):
            for v, coef in con.coeffs.items():
                A[i, self._index[v]] += coef
            b[i] = con.rhs
            rels.append(con.rel)
        c = np.zeros(n)
        for v, coef in self.objective.items():
            c[self._index[v]] += coef
        return A, b, rels, c

    def residual(self, x: np.ndarray) -> float:
        A, b, rels, _ = self.matrices()
        if not len(b):
            return 0.0
        r = A @ x - b
        viol = np.where(np.array(rels) == "=", np.abs(r), np.maximum(r, 0.0))
        return float(viol.max(initial=0.0))

    def to_lp_format(self) -> str:
        """CPLEX-style LP text."""

        def expr(coeffs: Mapping[str, float]) -> str:
            parts = []
            for v in self.variables:
                c = coeffs.get(v, 0.0)
                if c == 0.0:
                    continue
                sign = "-" if c < 0 else "+"
                parts.append(f"{sign} {abs(c):.17g} {v}")
            if not parts:
                return "0 " + (self.variables[0] if self.variables else "")
            text = " ".join(parts)
            return text[2:] if text.startswith("+ ") else text

        lines = [f"\\ {self.name}", "Maximize", f" obj: {expr(self.objective)}", "Subject To"]
        for i, con in enumerate(self.constraints):
            label = con.name or f"c{i + 1}"
            lines.append(f" {label}: {expr(con.coeffs)} {con.rel} {con.rhs:.17g}")
        lines.append("Bounds")
        lines.extend(f" {v} >= 0" for v in self.variables)
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    status: str
    objective: float
    values: dict[str, float]
    pivots: int = 0

    def __getitem__(self, name: str) -> float:
        return self.values[name]


class _Tableau:
    """Dense simplex tableau over a fixed standard-form system ``M x = b``.

    The last row holds reduced costs (negative = improving for a maximum)
    and the last column the basic values.  ``refresh`` rebuilds everything
    from ``M`` and the current basis, which bounds round-off drift.
    """

    REFRESH_EVERY = 25

    def __init__(self, M: np.ndarray, b: np.ndarray, basis: list[int]):
        self.M = M
        self.b = b
        self.basis = basis
        self.cost = np.zeros(M.shape[1])
        self.T = np.zeros((M.shape[0] + 1, M.shape[1] + 1))
        self.pivots = 0

    def set_cost(self, cost: np.ndarray) -> None:
        self.cost = cost
        self.refresh()

    def refresh(self) -> None:
        m = len(self.basis)
        B = self.M[:, self.basis]
        rhs = np.column_stack([self.M, self.b])
        T = self.T
        try:
            T[:m] = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            return
        cb = self.cost[self.basis]
        T[-1, :-1] = cb @ T[:m, :-1] - self.cost
        T[-1, -1] = cb @ T[:m, -1]

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if len(nz):
            T[nz] -= np.outer(col[nz], T[r])
        T[r, j] = 1.0
        T[nz, j] = 0.0
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise LpError("pivot limit exceeded")

    def run(self, allowed: int) -> str:
        """Bland's rule: lowest-index improving column enters; among tied
        ratio rows the one whose basic variable has the lowest index leaves."""
        T = self.T
        m = len(self.basis)
        fresh = False
        since = 0
        while True:
            d = T[-1, :allowed]
            cand = np.flatnonzero(d < -PIVOT_TOL)
            if not len(cand):
                if fresh:
                    return "optimal"
                self.refresh()
                fresh = True
                continue
            j = int(cand[0])
            col = T[:m, j]
            thresh = PIVOT_FLOOR * max(1.0, float(np.abs(col).max()))
            pos = np.flatnonzero(col > thresh)
            if not len(pos):
                if fresh:
                    return "unbounded"
                self.refresh()
                fresh = True
                continue
            ratios = np.maximum(T[pos, -1], 0.0) / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, best)]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, j)
            fresh = False
            since += 1
            if since >= self.REFRESH_EVERY:
                self.refresh()
                since = 0

    def drop_rows(self, keep: list[int]) -> None:
        self.M = self.M[keep]
        self.b = self.b[keep]
        self.basis = [self.basis[i] for i in keep]
        self.T = np.vstack([self.T[keep], self.T[-1:]])

    def drop_columns(self, first: int) -> None:
        self.M = self.M[:, :first]
        self.cost = self.cost[:first]
        self.T = np.delete(self.T, np.arange(first, self.T.shape[1] - 1), axis=1)


def solve(lp: LinearProgram) -> LpSolution:
    A, b, rels, c = lp.matrices()
    m, n = A.shape
    names = lp.variables
    if m == 0:
        if np.any(c > 0):
            return LpSolution("unbounded", math.inf, {v: 0.0 for v in names})
        return LpSolution("optimal", 0.0, {v: 0.0 for v in names})

    A = A.copy()
    b = b.copy()
    is_eq = np.array([r == "=" for r in rels])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    # one slack per inequality: +1, or -1 (a surplus) on flipped rows
    ineq_rows = np.flatnonzero(~is_eq)
    n_slack = len(ineq_rows)
    art_rows = np.flatnonzero(is_eq | flip)
    n_art = len(art_rows)
    n_real = n + n_slack
    M = np.zeros((m, n_real + n_art))
    M[:, :n] = A
    basis = [-1] * m
    for k, i in enumerate(ineq_rows):
        M[i, n + k] = -1.0 if flip[i] else 1.0
        if not flip[i]:
            basis[i] = n + k
    for k, i in enumerate(art_rows):
        M[i, n_real + k] = 1.0
        basis[i] = n_real + k
    tab = _Tableau(M, b, basis)

    if n_art:
        cost = np.zeros(n_real + n_art)
        cost[n_real:] = -1.0
        tab.set_cost(cost)
        if tab.run(n_real) != "optimal":
            raise LpError("phase 1 did not terminate at an optimum")
        if -tab.T[-1, -1] > FEAS_TOL:
            return LpSolution("infeasible", math.nan, {v: math.nan for v in names}, tab.pivots)
        # pivot leftover artificials out of the basis; drop redundant rows
        keep = []
        for i in range(len(tab.basis)):
            if tab.basis[i] >= n_real:
                row = tab.T[i, :n_real]
                cand = np.flatnonzero(np.abs(row) > 1e-9)
                if len(cand):
                    j = int(cand[np.argmax(np.abs(row[cand]))])
                    tab.pivot(i, j)
                    keep.append(i)
            else:
                keep.append(i)
        tab.drop_rows(keep)
        tab.drop_columns(n_real)

    cost = np.zeros(n_real)
    cost[:n] = c
    tab.set_cost(cost)
    status = tab.run(n_real)
    if status == "unbounded":
        return LpSolution("unbounded", math.inf, {v: math.nan for v in names}, tab.pivots)
    x_full = np.zeros(n_real)
    x_full[tab.basis] = tab.T[:-1, -1]
    x = np.maximum(x_full[:n], 0.0)
    res = lp.residual(x)
    if res > RESIDUAL_LIMIT:
        raise LpNumericalError(f"constraint residual {res:.3g} after solve of {lp.name}")
    return LpSolution("optimal", float(c @ x), dict(zip(names, map(float, x))), tab.pivots)


@dataclass(frozen=True)
class RatePoint:
    w1: float
    w2: float
    R1: float
    R2: float
    objective: float

    @property
    def rsum(self) -> float:
        return self.R1 + self.R2


RegionBoundary = list[RatePoint]


def weight_grid(count: int) -> list[tuple[float, float]]:
    """``count`` unit directions from (1,0) to (0,1)."""
    if count < 1:
        raise ValueError("weight count must be positive")
    if count == 1:
        return [(1.0, 0.0)]
    out = []
    for k in range(count):
        th = 0.5 * math.pi * k / (count - 1)
        w1, w2 = math.cos(th), math.sin(th)
        out.append((0.0 if k == count - 1 else w1, 0.0 if k == 0 else w2))
    return out


def maximize_weighted(lp: LinearProgram, w1: float, w2: float, solver: Callable = solve) -> RatePoint:
    if w1 < 0 or w2 < 0 or (w1 == 0 and w2 == 0):
        raise ValueError("weights must be non-negative and not both zero")
    work = lp.copy()
    work.maximize({"R1": w1, "R2": w2})
    sol = solver(work)
    if sol.status != "optimal":
        raise LpError(f"{lp.name}: {sol.status}")
    return RatePoint(w1, w2, sol["R1"], sol["R2"], sol.objective)


def sweep_boundary(
    builder: LinearProgram | Callable[[], LinearProgram],
    weights: Iterable[Sequence[float]],
    solver: Callable = solve,
) -> RegionBoundary:
    lp = builder if isinstance(builder, LinearProgram) else builder()
    pts = [maximize_weighted(lp, float(w1), float(w2), solver) for w1, w2 in weights]
    return sorted(pts, key=lambda p: math.atan2(p.w2, p.w1))
