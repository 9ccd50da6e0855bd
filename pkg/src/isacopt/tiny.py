"""Tiny random instances for cross-checking the MILP against exhaustive search."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .codebook import codebook_for
from .evaluator import verify
from .oracle import OracleResult, exhaustive_solve
from .scenario import Scenario, normalize
from .solve import Outcome, SolverConfig, solve_allocation

REL_TOL = 1e-6


def tiny_scenario(rng: np.random.Generator, antennas=(2, 3, 4), bits=(1, 2), users=(2, 3),
                  rf_chains=(1, 2), targets=(1, 2)) -> Scenario:
    """Unit-noise instance with i.i.d. Rayleigh channels.

    Thresholds are drawn so that both feasible and infeasible instances occur:
    the SINR target spans easy to hard, and the cross-interference cap is a
    random fraction of the largest achievable target power.
    """
    N = int(rng.choice(antennas))
    Q = int(rng.choice(bits))
    U = int(rng.choice(users))
    K = int(rng.choice([k for k in rf_chains if k <= U]))
    T = int(rng.choice(targets))
    J = int(rng.integers(1, min(K, T) + 1))
    h = (rng.normal(size=(U, N)) + 1j * rng.normal(size=(U, N))) / math.sqrt(2)
    P = float(10 ** rng.uniform(0.5, 1.5))
    alpha = rng.uniform(0.5, 1.5, T)
    xi = float(rng.uniform(0.05, 0.6) * alpha.max() * P / K * N)
    return Scenario(n_antennas=N, n_users=U, n_rf_chains=K, n_targets=T, n_sched_targets=J,
                    channels=h, noise_power=1.0, target_angles=rng.uniform(15, 165, T),
                    target_coeffs=alpha, sinr_thresholds=rng.uniform(0.5, 6.0, U),
                    cross_interference_threshold=xi, tx_power=P, phase_bits=Q)


@dataclass(eq=False)
class Comparison:
    scenario: Scenario
    oracle: OracleResult
    milp: Outcome
    oracle_time: float
    milp_time: float
    verified: bool

    @property
    def agree(self) -> bool:
        if self.oracle.feasible != self.milp.report.feasible:
            return False
        if not self.oracle.feasible:
            return True
        a, b = self.oracle.tau, self.milp.report.objective
        return abs(a - b) <= REL_TOL * max(abs(a), 1e-12) and self.verified

    def describe(self) -> str:
        sc = self.scenario
        dims = (f"N={sc.n_antennas} Q={sc.phase_bits} U={sc.n_users} K={sc.n_rf_chains} "
                f"T={sc.n_targets} J={sc.n_sched_targets}")
        o = f"{self.oracle.tau:.10g}" if self.oracle.feasible else "infeasible"
        m = f"{self.milp.report.objective:.10g}" if self.milp.report.feasible else "infeasible"
        verdict = "agree" if self.agree else "MISMATCH"
        return (f"{dims}  oracle {o} ({self.oracle.candidates} cand, {self.oracle_time:.2f}s)  "
                f"milp {m} ({self.milp.report.nodes} nodes, {self.milp_time:.2f}s)  {verdict}")


def compare_with_oracle(sc: Scenario, solver: SolverConfig = SolverConfig(rel_gap=1e-9)) -> Comparison:
    ns, cb = normalize(sc), codebook_for(sc)
    t0 = time.perf_counter()
    orc = exhaustive_solve(ns, cb)
    t1 = time.perf_counter()
    out = solve_allocation(ns, cb, solver)
    t2 = time.perf_counter()
    verified = out.allocation is None or verify(ns, out.allocation, cb).ok
    return Comparison(sc, orc, out, t1 - t0, t2 - t1, verified)
