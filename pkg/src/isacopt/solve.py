"""Build, solve and decode in one call."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Mapping

import numpy as np

from .allocation import Allocation
from .codebook import PhaseCodebook
from .milp.bnb import SolveReport, solve_milp
from .reformulation import VariableIndex, build_milp, decode_solution
from .scenario import NormalizedScenario


@dataclass(frozen=True)
class SolverConfig:
    rel_gap: float = 1e-4
    node_limit: int = 1_000_000
    time_limit: float | None = None
    lp_backend: str = "auto"
    threads: int = 1
    bigm: str = "safe"
    phase_anchor: bool = False

    @classmethod
    def from_dict(cls, tree: Mapping | None) -> "SolverConfig":
        return cls(**dict(tree or {}))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Outcome:
    report: SolveReport
    allocation: Allocation | None
    values: np.ndarray | None
    index: VariableIndex


def solve_allocation(ns: NormalizedScenario, cb: PhaseCodebook,
                     config: SolverConfig = SolverConfig(),
                     fixed: Mapping[str, Mapping] | None = None,
                     on_incumbent: Callable[[np.ndarray], None] | None = None) -> Outcome:
    """Solve the joint problem, optionally with some binaries pinned.

    ``fixed`` may carry ``mu`` (user -> 0/1), ``lam`` (target -> 0/1) and
    ``rho`` ((user, target) -> 0/1) entries.
    """
    model, index = build_milp(ns, cb, bigm=config.bigm, phase_anchor=config.phase_anchor)
    if fixed:
        pins: dict[int, tuple[float, float]] = {}
        for u, v in (fixed.get("mu") or {}).items():
            pins[int(index.mu[u])] = (float(v), float(v))
        for t, v in (fixed.get("lam") or {}).items():
            pins[int(index.lam[t])] = (float(v), float(v))
        for (u, t), v in (fixed.get("rho") or {}).items():
            pins[int(index.rho[u, t])] = (float(v), float(v))
        model = model.with_bounds(pins)
    report, values = solve_milp(model, rel_gap=config.rel_gap, node_limit=config.node_limit,
                                lp_backend=config.lp_backend, time_limit=config.time_limit,
                                threads=config.threads, on_incumbent=on_incumbent)
    alloc = None if values is None else decode_solution(values, index, cb)
    return Outcome(report, alloc, values, index)
