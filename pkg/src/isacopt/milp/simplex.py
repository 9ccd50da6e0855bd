"""Dense bounded-variable revised simplex (primal, two phase).

Every row gets a slack whose bounds encode the sense, so the working system is
``[A I] z = b`` with ``lo <= z <= hi``. Nonbasic variables sit at one of their
bounds. Rows whose starting slack would violate its bounds receive an
artificial column that phase 1 drives to zero. The basis inverse is kept
explicitly and updated with eta transformations, refactorized periodically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import EQ, GE, LE, MilpModel

OPTIMAL, INFEASIBLE, UNBOUNDED, NUMERICAL = "optimal", "infeasible", "unbounded", "numerical"


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-8
    optimality: float = 1e-9
    pivot: float = 1e-9
    integrality: float = 1e-6
    refactor_every: int = 50
    degenerate_before_bland: int = 30
    max_iterations: int = 50_000


DEFAULT_TOL = Tolerances()


@dataclass
class LpSolution:
    status: str
    objective: float = float("nan")
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    iterations: int = 0
    message: str = ""


@dataclass
class _State:
    Aext: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    basis: np.ndarray
    at_upper: np.ndarray
    z: np.ndarray
    Binv: np.ndarray = field(default=None)


def solve_lp(model: MilpModel, lb=None, ub=None, tol: Tolerances = DEFAULT_TOL) -> LpSolution:
    """Maximize the model objective over its LP relaxation (integrality ignored).

    ``lb``/``ub`` override the model bounds without copying the model.
    """
    c, A, senses, b, mlb, mub, _ = model.arrays()
    lb = mlb if lb is None else np.asarray(lb, dtype=float)
    ub = mub if ub is None else np.asarray(ub, dtype=float)
    return solve_dense(c, A.toarray(), senses, b, lb, ub, tol)


def solve_dense(c, A, senses, b, lb, ub, tol: Tolerances = DEFAULT_TOL) -> LpSolution:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape
    if np.any(lb > ub + tol.feasibility):
        return LpSolution(INFEASIBLE, message="crossed variable bounds")
    if m == 0:
        x = np.where(c > 0, ub, lb)
        if np.any(~np.isfinite(x)):
            return LpSolution(UNBOUNDED)
        return LpSolution(OPTIMAL, float(c @ x), x, np.zeros(0))

    senses = np.asarray(senses)
    s_lo = np.where(senses == GE, -np.inf, 0.0)
    s_hi = np.where(senses == LE, np.inf, 0.0)

    x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    resid = b - A @ x0
    # starting slack value clipped into its bounds; the remainder goes to an artificial
    s0 = np.clip(resid, s_lo, s_hi)
    need = np.abs(resid - s0) > 0.0
    art_rows = np.flatnonzero(need)
    k = art_rows.size
    art_cols = np.zeros((m, k))
    art_cols[art_rows, np.arange(k)] = np.sign(resid[art_rows] - s0[art_rows])

    Aext = np.hstack([A, np.eye(m), art_cols])
    lo = np.concatenate([lb, s_lo, np.zeros(k)])
    hi = np.concatenate([ub, s_hi, np.full(k, np.inf)])
    z = np.concatenate([x0, s0, np.abs(resid[art_rows] - s0[art_rows])])
    basis = np.arange(n, n + m)
    basis[art_rows] = n + m + np.arange(k)
    at_upper = np.zeros(n + m + k, dtype=bool)
    # slacks not in the basis are parked at the bound they were clipped to
    for i in art_rows:
        j = n + i
        at_upper[j] = np.isfinite(s_hi[i]) and s0[i] == s_hi[i] and s_lo[i] != s_hi[i]
    at_upper[:n] = ~np.isfinite(lb) & np.isfinite(ub)
    st = _State(Aext, lo, hi, basis, at_upper, z)
    _refactor(st, b)

    iters = 0
    if k:
        cost1 = np.concatenate([np.zeros(n + m), -np.ones(k)])
        status, it = _iterate(st, cost1, b, tol, tol.max_iterations)
        iters += it
        if status != OPTIMAL:
            return LpSolution(NUMERICAL, iterations=iters, message=f"phase 1 ended {status}")
        infeas = st.z[n + m:].sum()
        scale = max(1.0, np.abs(b).max(initial=0.0))
        if infeas > tol.feasibility * scale:
            return LpSolution(INFEASIBLE, iterations=iters)
        # artificials pinned at zero; any left in the basis stay there harmlessly
        st.hi[n + m:] = 0.0
        st.z[n + m:] = np.where(np.isin(np.arange(k), st.basis - n - m), st.z[n + m:], 0.0)

    cost2 = np.concatenate([c, np.zeros(m + k)])
    status, it = _iterate(st, cost2, b, tol, tol.max_iterations - iters)
    iters += it
    if status != OPTIMAL:
        return LpSolution(status, iterations=iters)
    _refactor(st, b)
    x = st.z[:n].copy()
    y = cost2[st.basis] @ st.Binv
    return LpSolution(OPTIMAL, float(c @ x), x, y, iterations=iters)


def _refactor(st: _State, b: np.ndarray) -> None:
    B = st.Aext[:, st.basis]
    st.Binv = np.linalg.inv(B)
    nonbasic = np.ones(st.z.size, dtype=bool)
    nonbasic[st.basis] = False
    zn = np.where(st.at_upper, st.hi, st.lo)
    zn = np.where(np.isfinite(zn), zn, 0.0)
    st.z[nonbasic] = zn[nonbasic]
    st.z[st.basis] = st.Binv @ (b - st.Aext[:, nonbasic] @ st.z[nonbasic])


def _iterate(st: _State, cost: np.ndarray, b: np.ndarray, tol: Tolerances, budget: int):
    m = st.basis.size
    ntot = st.z.size
    degenerate_run = 0
    fixed = st.lo == st.hi
    for it in range(max(budget, 0)):
        if it and it % tol.refactor_every == 0:
            _refactor(st, b)
        y = cost[st.basis] @ st.Binv
        d = cost - y @ st.Aext
        nonbasic = np.ones(ntot, dtype=bool)
        nonbasic[st.basis] = False
        up_ok = nonbasic & ~fixed & ~st.at_upper & (d > tol.optimality)
        down_ok = nonbasic & ~fixed & st.at_upper & (d < -tol.optimality)
        # free nonbasics (both bounds infinite) do not occur: every slack has a finite side
        cand = np.flatnonzero(up_ok | down_ok)
        if cand.size == 0:
            return OPTIMAL, it
        bland = degenerate_run >= tol.degenerate_before_bland
        j = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
        direction = 1.0 if up_ok[j] else -1.0

        alpha = st.Binv @ st.Aext[:, j]
        # basic values move by -direction * theta * alpha
        delta = -direction * alpha
        zb = st.z[st.basis]
        lob, hib = st.lo[st.basis], st.hi[st.basis]
        theta = np.full(m, np.inf)
        dec = delta < -tol.pivot
        inc = delta > tol.pivot
        with np.errstate(divide="ignore", invalid="ignore"):
            theta[dec] = (zb[dec] - lob[dec]) / -delta[dec]
            theta[inc] = (hib[inc] - zb[inc]) / delta[inc]
        theta = np.maximum(theta, 0.0)
        flip = st.hi[j] - st.lo[j]
        tmin = theta.min() if m else np.inf
        if not np.isfinite(tmin) and not np.isfinite(flip):
            return UNBOUNDED, it
        if flip <= tmin:
            st.z[st.basis] = zb + flip * delta
            st.at_upper[j] = not st.at_upper[j]
            st.z[j] = st.hi[j] if st.at_upper[j] else st.lo[j]
            degenerate_run = 0 if flip > 0 else degenerate_run + 1
            continue
        ties = np.flatnonzero(theta <= tmin + 1e-12 * max(1.0, tmin))
        if bland:
            r = int(ties[np.argmin(st.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(alpha[ties]))])
        leaving = st.basis[r]
        st.z[st.basis] = zb + tmin * delta
        st.z[j] = st.z[j] + direction * tmin
        # leaving variable lands on the bound it hit
        st.at_upper[leaving] = bool(delta[r] > 0)
        st.z[leaving] = st.hi[leaving] if st.at_upper[leaving] else st.lo[leaving]
        st.at_upper[j] = False
        st.basis[r] = j
        piv = alpha[r]
        row = st.Binv[r] / piv
        st.Binv -= np.outer(alpha, row)
        st.Binv[r] = row
        degenerate_run = degenerate_run + 1 if tmin <= tol.feasibility else 0
    return NUMERICAL, budget
