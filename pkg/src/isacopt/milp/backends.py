"""Node LP solvers behind one call signature: ``(model, lb, ub) -> LpSolution``."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .model import EQ, GE, LE, MilpModel
from .simplex import DEFAULT_TOL, INFEASIBLE, NUMERICAL, OPTIMAL, UNBOUNDED, LpSolution, solve_dense

_highs_cache: dict[int, tuple] = {}


class DenseSimplex:
    """In-repo simplex on the densified constraint matrix (cached per model)."""

    name = "simplex"

    def __init__(self, model: MilpModel, tol=DEFAULT_TOL):
        c, A, senses, b, _, _, _ = model.arrays()
        self._data = (c, A.toarray(), senses, b)
        self.tol = tol

    def __call__(self, lb, ub) -> LpSolution:
        c, A, senses, b = self._data
        return solve_dense(c, A, senses, b, lb, ub, self.tol)


class Highs:
    """HiGHS dual simplex through :func:`scipy.optimize.linprog`."""

    name = "highs"

    def __init__(self, model: MilpModel, tol=DEFAULT_TOL):
        c, A, senses, b, _, _, _ = model.arrays()
        le, ge, eq = senses == LE, senses == GE, senses == EQ
        A_ub = sp.vstack([A[le], -A[ge]]).tocsr()
        b_ub = np.concatenate([b[le], -b[ge]])
        self._data = (-c, A_ub if A_ub.shape[0] else None, b_ub if A_ub.shape[0] else None,
                      A[eq] if eq.any() else None, b[eq] if eq.any() else None)
        self._c = c
        self.tol = tol

    def __call__(self, lb, ub) -> LpSolution:
        negc, A_ub, b_ub, A_eq, b_eq = self._data
        res = linprog(negc, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=np.column_stack([lb, ub]), method="highs-ds",
                      options={"primal_feasibility_tolerance": self.tol.feasibility,
                               "dual_feasibility_tolerance": self.tol.optimality,
                               "presolve": True})
        if res.status == 0:
            return LpSolution(OPTIMAL, float(self._c @ res.x), res.x, None, int(res.nit))
        if res.status == 2:
            return LpSolution(INFEASIBLE, message=res.message)
        if res.status == 3:
            return LpSolution(UNBOUNDED, message=res.message)
        return LpSolution(NUMERICAL, message=res.message)


BACKENDS = {"simplex": DenseSimplex, "highs": Highs}
AUTO_DENSE_LIMIT = 50_000


def make_backend(name: str, model: MilpModel, tol=DEFAULT_TOL):
    """``auto`` uses the in-repo simplex while the dense matrix stays small."""
    if name == "auto":
        name = "simplex" if model.n_rows * (model.n_vars + model.n_rows) <= AUTO_DENSE_LIMIT else "highs"
    try:
        return BACKENDS[name](model, tol)
    except KeyError:
        raise ValueError(f"unknown LP backend {name!r}; choose from {sorted(BACKENDS)} or 'auto'") from None
