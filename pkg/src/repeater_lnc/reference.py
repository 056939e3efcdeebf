"""Independent reference solve of a ``LinearProgram`` through SciPy's HiGHS.

Only used to cross-check the hand-written simplex.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .lp import LinearProgram, LpSolution


def reference_solve(lp: LinearProgram) -> LpSolution:
    A, b, rels, c = lp.matrices()
    n = len(lp.variables)
    if n == 0:
        return LpSolution("optimal", 0.0, {})
    rels = np.array(rels, dtype=object)
    ub = rels == "<="
    eq = rels == "="
    res = linprog(
        -c,
        A_ub=A[ub] if ub.any() else None,
        b_ub=b[ub] if ub.any() else None,
        A_eq=A[eq] if eq.any() else None,
        b_eq=b[eq] if eq.any() else None,
        bounds=[(0, None)] * n,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
    if status != "optimal":
        return LpSolution(status, float("nan"), {})
    return LpSolution("optimal", float(c @ res.x), dict(zip(lp.variables, map(float, res.x))))
