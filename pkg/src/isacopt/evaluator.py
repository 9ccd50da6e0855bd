"""Direct checks of an allocation against the original constraints, plus metrics.

Nothing here touches the MILP: SINR, DPG and cross-interference are computed
from the beams themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allocation import Allocation
from .codebook import PhaseCodebook
from .scenario import NormalizedScenario, steering_vector

MARGIN = 1e-9


def sinr(ns: NormalizedScenario, alloc: Allocation, u: int) -> float:
    g = np.abs(alloc.beams.conj() @ ns.h[u]) ** 2        # |h_u^H w_i|^2 for every i
    signal = g[u]
    if signal == 0.0:
        return 0.0
    return float(signal / (g.sum() - signal + 1.0))


def dpg(ns: NormalizedScenario, alloc: Allocation, t: int) -> float:
    v = alloc.illuminating_beam(t)
    return float(np.real(v.conj() @ ns.G[t] @ v))


def cross_power(ns: NormalizedScenario, alloc: Allocation, t: int, q: int) -> float:
    """Power of target ``t``'s illuminating beam seen through target ``q``'s response."""
    if t == q:
        raise ValueError("cross power needs two distinct targets")
    v = alloc.illuminating_beam(t)
    return float(np.real(v.conj() @ ns.G[q] @ v))


def beampattern(beam: np.ndarray, theta_grid) -> np.ndarray:
    """``|a(theta)^H w|^2`` over a grid of angles in degrees."""
    w = np.asarray(beam, dtype=complex)
    A = np.stack([steering_vector(th, w.size) for th in np.atleast_1d(theta_grid)])
    return np.abs(A.conj() @ w) ** 2


@dataclass
class Check:
    name: str
    margin: float

    @property
    def ok(self) -> bool:
        return self.margin >= -MARGIN


@dataclass
class FeasibilityReport:
    checks: list[Check] = field(default_factory=list)
    tau_check: float = float("nan")
    tau_error: float = float("nan")

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def __str__(self) -> str:
        bad = self.failures()
        if not bad:
            return f"feasible (tau_check={self.tau_check:.6g}, |dtau|={self.tau_error:.3g})"
        return "infeasible: " + ", ".join(f"{c.name} ({c.margin:.3g})" for c in bad)


def verify(ns: NormalizedScenario, alloc: Allocation, cb: PhaseCodebook) -> FeasibilityReport:
    """Check every original constraint; margins are positive when satisfied.

    SINR and cross-interference margins are relative to their thresholds so a
    single tolerance works across power scales.
    """
    U, T, K, J = ns.n_users, ns.n_targets, ns.n_rf_chains, ns.n_sched_targets
    rep = FeasibilityReport()
    add = rep.checks.append
    users, targets = set(alloc.scheduled_users), set(alloc.scheduled_targets)

    add(Check("C2 users scheduled", -abs(len(users) - K)))
    add(Check("C4 targets scheduled", -abs(len(targets) - J)))
    for t in range(T):
        want = 1 if t in targets else 0
        add(Check(f"C6 target {t} paired", -abs((t in alloc.pairing) - want)))
    load: dict[int, int] = {}
    for t, u in alloc.pairing.items():
        load[u] = load.get(u, 0) + 1
    for u in range(U):
        add(Check(f"C7 user {u}", float((1 if u in users else 0) - load.get(u, 0))))

    for u in range(U):
        s = sinr(ns, alloc, u)
        if u in users:
            thr = ns.sinr_thresholds[u]
            add(Check(f"C8 SINR user {u}", (s - thr) / max(1.0, thr)))
        else:
            add(Check(f"C8 SINR user {u} off", -s))

    dpgs = {t: dpg(ns, alloc, t) for t in range(T)}
    scale = max(1.0, abs(alloc.tau))
    for t in range(T):
        if t in targets:
            add(Check(f"C10 DPG target {t}", (dpgs[t] - alloc.tau) / scale))
        else:
            add(Check(f"C10 DPG target {t} off", -dpgs[t]))
    xi = ns.cross_interference_threshold
    for t in targets:
        for q in targets:
            if t != q:
                add(Check(f"C11 cross {t}->{q}", (xi - cross_power(ns, alloc, t, q)) / max(1.0, xi)))

    for u in range(U):
        w = alloc.beams[u]
        if u in users:
            bad = sum(not cb.contains(z) for z in w)
        else:
            bad = int(np.count_nonzero(np.abs(w) > MARGIN))
        add(Check(f"C12 beam user {u}", -float(bad)))

    rep.tau_check = min((dpgs[t] for t in targets), default=float("nan"))
    rep.tau_error = abs(rep.tau_check - alloc.tau)
    add(Check("C9 tau >= 0", alloc.tau))
    return rep


def min_dpg(ns: NormalizedScenario, alloc: Allocation) -> float:
    return min(dpg(ns, alloc, t) for t in alloc.scheduled_targets)
