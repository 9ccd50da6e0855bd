"""Exhaustive search over the original (unreformulated) problem.

Only usable on tiny instances, which is the point: it shares nothing with the
MILP path except the scenario and codebook, so agreement between the two is
evidence that the reformulation is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations, product

import numpy as np

from .allocation import Allocation
from .codebook import PhaseCodebook
from .scenario import NormalizedScenario, steering_vector

FEAS_MARGIN = 1e-9
DEFAULT_BUDGET = 10 ** 7


class BudgetExceeded(RuntimeError):
    def __init__(self, count: int, budget: int):
        super().__init__(f"exhaustive search needs {count} candidates, budget is {budget}")
        self.count = count
        self.budget = budget


@dataclass(frozen=True, eq=False)
class OracleResult:
    feasible: bool
    tau: float
    allocation: Allocation | None
    candidates: int


def n_assignments(K: int, T: int, J: int) -> int:
    """Injective maps from a J-subset of the T targets onto the K scheduled users."""
    return math.comb(T, J) * math.perm(K, J)


def candidate_count(U: int, K: int, T: int, J: int, N: int, Q: int) -> int:
    return 2 ** (K * Q * N) * math.comb(U, K) * n_assignments(K, T, J)


def paper_complexity(U: int, K: int, T: int, N: int, Q: int) -> int:
    """Worst-case count quoted for exhaustive search: 2^(KQN) C(U,K) T!."""
    return 2 ** (K * Q * N) * math.comb(U, K) * math.factorial(T)


def all_beams(cb: PhaseCodebook, n: int) -> np.ndarray:
    """Every codebook beam of length ``n``, antenna 0 as the most significant digit."""
    digits = np.array(list(product(range(cb.size), repeat=n)), dtype=int).reshape(-1, n)
    return cb.symbols[digits]


def exhaustive_solve(ns: NormalizedScenario, cb: PhaseCodebook,
                     budget: int = DEFAULT_BUDGET) -> OracleResult:
    U, K, T, J, N = ns.n_users, ns.n_rf_chains, ns.n_targets, ns.n_sched_targets, ns.n_antennas
    total = candidate_count(U, K, T, J, N, cb.q_bits)
    if total > budget:
        raise BudgetExceeded(total, budget)

    beams = all_beams(cb, N)                                    # (M, N)
    M = beams.shape[0]
    # |h_u^H w|^2 for every user and beam; alpha_q |a_q^H w|^2 for every target and beam
    gain = np.abs(ns.h.conj() @ beams.T) ** 2                   # (U, M)
    steer = np.stack([steering_vector(th, N) for th in ns.target_angles])
    tpow = ns.target_coeffs[:, None] * np.abs(steer.conj() @ beams.T) ** 2   # (T, M)
    xi = ns.cross_interference_threshold

    best_tau, best = -np.inf, None
    evaluated = 0
    for users in combinations(range(U), K):
        # SINR feasibility on the K-dimensional beam grid
        ok = np.ones((M,) * K, dtype=bool)
        for k, u in enumerate(users):
            sig = _along(gain[u], k, K)
            interf = 1.0
            for j, i in enumerate(users):
                if j != k:
                    interf = interf + _along(gain[u], j, K)
            thr = ns.sinr_thresholds[u]
            ok &= sig / interf >= thr - FEAS_MARGIN * max(1.0, thr)
        for tset in combinations(range(T), J):
            for assigned in permutations(range(K), J):
                evaluated += M ** K
                feas = ok.copy()
                obj = np.full((M,) * K, np.inf)
                for t, k in zip(tset, assigned):
                    obj = np.minimum(obj, _along(tpow[t], k, K))
                    for q in tset:
                        if q != t:
                            feas &= _along(tpow[q], k, K) <= xi + FEAS_MARGIN * max(1.0, xi)
                if not feas.any():
                    continue
                obj = np.where(feas, obj, -np.inf)
                flat = int(np.argmax(obj))
                if obj.flat[flat] > best_tau:
                    best_tau = float(obj.flat[flat])
                    picks = np.unravel_index(flat, obj.shape)
                    best = (users, tset, assigned, picks)
    if best is None:
        return OracleResult(False, float("nan"), None, evaluated)

    users, tset, assigned, picks = best
    w = np.zeros((U, N), dtype=complex)
    for k, u in enumerate(users):
        w[u] = beams[picks[k]]
    pairing = {t: users[k] for t, k in zip(tset, assigned)}
    alloc = Allocation(tuple(users), tuple(tset), pairing, w, best_tau)
    return OracleResult(True, best_tau, alloc, evaluated)


def _along(vec: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = -1
    return vec.reshape(shape)
