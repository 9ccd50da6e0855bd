"""Heuristic scheduling/pairing baselines, each finished by an optimal beam search.

Every baseline fixes some of the scheduling and pairing binaries of the MILP
and solves the rest to the same gap tolerance as the joint method:

* ``BL1`` pairs first: a max-weight matching of all targets onto all users,
  then schedules the users of the ``J`` strongest pairs and tops up the
  schedule with the users least correlated to those already chosen.
* ``BL2`` schedules first: the ``K`` users with the least mutual channel
  correlation, then pairs ``J`` targets onto them by max-weight matching.
* ``BL3`` draws the schedule at random; pairing and beams stay optimal.
* ``BL4`` draws schedule, targets and pairing at random.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .codebook import PhaseCodebook
from .scenario import NormalizedScenario, steering_vector
from .solve import Outcome, SolverConfig, solve_allocation

KINDS = ("BL1", "BL2", "BL3", "BL4")
AGGREGATIONS = ("max", "sum")


class BaselineError(ValueError):
    pass


@dataclass(frozen=True)
class FixedAssignment:
    """Scheduling decisions handed to the restricted solve; ``pairing`` maps target -> user."""

    scheduled_users: tuple[int, ...]
    scheduled_targets: tuple[int, ...] | None = None
    pairing: dict[int, int] | None = None

    def validate(self, U: int, K: int, T: int, J: int) -> None:
        users = self.scheduled_users
        if len(set(users)) != K or len(users) != K or not all(0 <= u < U for u in users):
            raise BaselineError(f"need {K} distinct users in [0, {U}), got {users}")
        if self.pairing is None:
            return
        targets = tuple(sorted(self.pairing))
        if self.scheduled_targets is not None and targets != tuple(sorted(self.scheduled_targets)):
            raise BaselineError("pairing keys must equal the scheduled targets")
        if len(targets) != J or not all(0 <= t < T for t in targets):
            raise BaselineError(f"need {J} distinct targets in [0, {T}), got {targets}")
        paired = list(self.pairing.values())
        if len(set(paired)) != len(paired) or not set(paired) <= set(users):
            raise BaselineError("pairing must be injective onto scheduled users")

    def fixes(self, U: int, T: int) -> dict[str, dict]:
        mu = {u: float(u in self.scheduled_users) for u in range(U)}
        out: dict[str, dict] = {"mu": mu}
        if self.pairing is not None:
            out["lam"] = {t: float(t in self.pairing) for t in range(T)}
            out["rho"] = {(u, t): float(self.pairing.get(t) == u)
                          for u in range(U) for t in range(T)}
        return out


def _normalized_abs_inner(a: np.ndarray, b: np.ndarray, what: str) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise BaselineError(f"zero vector in {what}")
    return float(min(abs(np.vdot(a, b)) / (na * nb), 1.0))


def alignment_weight(h: np.ndarray, theta: float) -> float:
    """|h^H a(theta)| / (|h| |a(theta)|)."""
    h = np.asarray(h, dtype=complex)
    return _normalized_abs_inner(h, steering_vector(theta, h.size), "alignment weight")


def channel_correlation(h_u: np.ndarray, h_i: np.ndarray) -> float:
    """|h_u^H h_i| / (|h_u| |h_i|)."""
    return _normalized_abs_inner(np.asarray(h_u, dtype=complex), np.asarray(h_i, dtype=complex),
                                 "channel correlation")


def alignment_matrix(channels: np.ndarray, angles) -> np.ndarray:
    return np.array([[alignment_weight(h, th) for th in angles] for h in channels])


def correlation_matrix(channels: np.ndarray) -> np.ndarray:
    U = len(channels)
    C = np.eye(U)
    for u, i in combinations(range(U), 2):
        C[u, i] = C[i, u] = channel_correlation(channels[u], channels[i])
    return C


def max_weight_matching(weights, size: int) -> dict[int, int]:
    """Max-weight matching of exactly ``size`` columns onto distinct rows.

    Returns ``{column: row}``. Solved as a rectangular assignment in which each
    row either takes a real column or one of ``rows - size`` dummy columns; the
    dummies carry a bonus larger than any real total, so all of them are used
    and exactly ``size`` real edges remain.
    """
    W = np.asarray(weights, dtype=float)
    if W.ndim != 2 or not np.all(np.isfinite(W)) or np.any(W < 0):
        raise BaselineError("weights must be a finite nonnegative matrix")
    R, C = W.shape
    if not 0 <= size <= min(R, C):
        raise BaselineError(f"matching size {size} exceeds min{W.shape}")
    bonus = W.sum() + 1.0
    aug = np.hstack([W, np.full((R, R - size), bonus)])
    rows, cols = linear_sum_assignment(aug, maximize=True)
    return {int(c): int(r) for r, c in zip(rows, cols) if c < C}


def least_correlated_users(corr: np.ndarray, K: int, aggregate: str = "max") -> tuple[int, ...]:
    """K-subset minimizing the chosen aggregate of pairwise correlations.

    ``max`` breaks ties by the sum and ``sum`` by the max; remaining ties go to
    the lexicographically first subset.
    """
    if aggregate not in AGGREGATIONS:
        raise BaselineError(f"aggregate must be one of {AGGREGATIONS}")
    best, best_key = None, None
    for sub in combinations(range(len(corr)), K):
        vals = [corr[u, i] for u, i in combinations(sub, 2)] or [0.0]
        key = (max(vals), sum(vals)) if aggregate == "max" else (sum(vals), max(vals))
        if best_key is None or key < best_key:
            best, best_key = sub, key
    return tuple(best)


def bl1_assignment(ns: NormalizedScenario) -> FixedAssignment:
    U, K, T, J = ns.n_users, ns.n_rf_chains, ns.n_targets, ns.n_sched_targets
    W = alignment_matrix(ns.channels, ns.target_angles)
    matched = max_weight_matching(W, min(U, T))
    # strongest pairs first, lower target index on ties
    ranked = sorted(matched.items(), key=lambda tu: (-W[tu[1], tu[0]], tu[0]))[:J]
    pairing = dict(ranked)
    users = [u for _, u in ranked]
    corr = correlation_matrix(ns.channels)
    while len(users) < K:
        rest = [u for u in range(U) if u not in users]
        # greedy top-up; with nobody scheduled yet every candidate scores zero
        users.append(min(rest, key=lambda u: (max((corr[u, s] for s in users), default=0.0), u)))
    return FixedAssignment(tuple(sorted(users)), tuple(sorted(pairing)), pairing)


def bl2_assignment(ns: NormalizedScenario, aggregate: str = "max") -> FixedAssignment:
    K, J = ns.n_rf_chains, ns.n_sched_targets
    users = least_correlated_users(correlation_matrix(ns.channels), K, aggregate)
    W = alignment_matrix(ns.channels[list(users)], ns.target_angles)
    local = max_weight_matching(W, J)
    pairing = {t: users[r] for t, r in local.items()}
    return FixedAssignment(users, tuple(sorted(pairing)), pairing)


def bl3_assignment(ns: NormalizedScenario, rng: np.random.Generator) -> FixedAssignment:
    users = rng.choice(ns.n_users, size=ns.n_rf_chains, replace=False)
    return FixedAssignment(tuple(sorted(int(u) for u in users)))


def bl4_assignment(ns: NormalizedScenario, rng: np.random.Generator) -> FixedAssignment:
    users = sorted(int(u) for u in rng.choice(ns.n_users, size=ns.n_rf_chains, replace=False))
    targets = [int(t) for t in rng.choice(ns.n_targets, size=ns.n_sched_targets, replace=False)]
    owners = [users[int(i)] for i in rng.permutation(len(users))[:len(targets)]]
    pairing = dict(zip(targets, owners))
    return FixedAssignment(tuple(users), tuple(sorted(pairing)), pairing)


def heuristic_assignment(kind: str, ns: NormalizedScenario, rng: np.random.Generator | None = None,
                         aggregate: str = "max") -> FixedAssignment:
    if kind == "BL1":
        return bl1_assignment(ns)
    if kind == "BL2":
        return bl2_assignment(ns, aggregate)
    if kind in ("BL3", "BL4"):
        if rng is None:
            raise BaselineError(f"{kind} needs a random generator")
        return bl3_assignment(ns, rng) if kind == "BL3" else bl4_assignment(ns, rng)
    raise BaselineError(f"unknown baseline {kind!r}; choose from {KINDS}")


def run_baseline(kind: str, ns: NormalizedScenario, cb: PhaseCodebook,
                 rng: np.random.Generator | None = None,
                 config: SolverConfig = SolverConfig(), aggregate: str = "max") -> Outcome:
    """Fix the heuristic's binaries and solve for the remaining ones and the beams.

    An infeasible restricted problem comes back as ``report.status == "infeasible"``
    with no allocation.
    """
    fa = heuristic_assignment(kind, ns, rng, aggregate)
    fa.validate(ns.n_users, ns.n_rf_chains, ns.n_targets, ns.n_sched_targets)
    out = solve_allocation(ns, cb, config, fixed=fa.fixes(ns.n_users, ns.n_targets))
    if out.allocation is not None:
        out.allocation.meta.update(method=kind)
    return out
