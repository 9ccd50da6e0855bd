"""Best-bound branch and bound for binary MILPs (maximization).

Branches on the most fractional binary (lowest index on ties). Until the
first incumbent exists the search plunges depth-first, preferring the child
the LP value points to; afterwards it always expands the open node with the
largest bound. A node whose LP solution is integral on every binary becomes
an incumbent candidate as is.
"""

from __future__ import annotations

import heapq
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .backends import make_backend
from .model import MilpModel
from .simplex import DEFAULT_TOL, INFEASIBLE, NUMERICAL, OPTIMAL, UNBOUNDED, LpSolution, Tolerances

OPTIMAL_STATUS = "optimal"
GAP_LIMIT = "gap-limit"
NODE_LIMIT = "node-limit"
TIME_LIMIT = "time-limit"
INFEASIBLE_STATUS = "infeasible"
GAP_EPS = 1e-9

# (model, lb, ub, lp_solution) -> extra rows to add; reserved, nothing ships by default
CutCallback = Callable[[MilpModel, np.ndarray, np.ndarray, LpSolution], None]


class SolverError(RuntimeError):
    pass


@dataclass
class SolveReport:
    status: str
    objective: float
    bound: float
    gap: float
    nodes: int
    wall_time: float
    lp_backend: str = ""
    history: list[tuple[float, float]] = field(default_factory=list, repr=False)

    @property
    def solved(self) -> bool:
        """Incumbent proven within the gap tolerance."""
        return self.status in (OPTIMAL_STATUS, GAP_LIMIT)

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE_STATUS and np.isfinite(self.objective)


@dataclass(order=True)
class _Node:
    key: float
    seq: int
    bound: float = field(compare=False)
    lb: np.ndarray = field(compare=False, repr=False)
    ub: np.ndarray = field(compare=False, repr=False)
    depth: int = field(compare=False, default=0)


def relative_gap(bound: float, incumbent: float) -> float:
    if not np.isfinite(incumbent):
        return float("inf")
    return max(bound - incumbent, 0.0) / max(abs(incumbent), GAP_EPS)


def solve_milp(model: MilpModel, rel_gap: float = 1e-4, node_limit: int = 1_000_000,
               lp_backend: str = "auto", time_limit: float | None = None,
               tol: Tolerances = DEFAULT_TOL, threads: int = 1,
               cut_callback: CutCallback | None = None,
               record_history: bool = False,
               on_incumbent: Callable[[np.ndarray], None] | None = None,
               ) -> tuple[SolveReport, np.ndarray | None]:
    """Solve ``model`` to a relative gap; returns the report and the incumbent point.

    ``threads > 1`` solves batches of open nodes concurrently. The optimal
    value is unaffected but node counts may differ from the serial run.
    """
    if rel_gap <= 0:
        raise ValueError("rel_gap must be positive")
    model.validate()
    t0 = time.perf_counter()
    lp = make_backend(lp_backend, model, tol)
    _, _, _, _, lb0, ub0, is_bin = model.arrays()
    bins = np.flatnonzero(is_bin)
    counter = itertools.count()
    nodes = 0
    incumbent, best_x = -np.inf, None
    history: list[tuple[float, float]] = []
    pruned = [-np.inf]   # best bound among nodes dropped within the gap slack

    def solve_node(node: _Node) -> LpSolution:
        sol = lp(node.lb, node.ub)
        if sol.status == NUMERICAL:
            raise SolverError(f"LP failure at node depth {node.depth}: {sol.message}")
        if cut_callback is not None and sol.status == OPTIMAL:
            cut_callback(model, node.lb, node.ub, sol)
        return sol

    root = _Node(-np.inf, next(counter), np.inf, lb0.copy(), ub0.copy())
    heap: list[_Node] = []
    dive: _Node | None = root

    def open_bound() -> float:
        b = -np.inf if dive is None else dive.bound
        if heap:
            b = max(b, -heap[0].key)
        return b

    def finish(status: str) -> tuple[SolveReport, np.ndarray | None]:
        bound = max(open_bound(), incumbent) if status != INFEASIBLE_STATUS else -np.inf
        if status == OPTIMAL_STATUS:
            bound = max(incumbent, pruned[0])
        rep = SolveReport(status, float(incumbent), float(bound),
                          relative_gap(bound, incumbent) if np.isfinite(incumbent) else float("inf"),
                          nodes, time.perf_counter() - t0, lp.name, history)
        return rep, best_x

    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while dive is not None or heap:
            if np.isfinite(incumbent):
                if relative_gap(open_bound(), incumbent) <= rel_gap:
                    return finish(GAP_LIMIT)
            if nodes >= node_limit:
                return finish(NODE_LIMIT)
            if time_limit is not None and time.perf_counter() - t0 > time_limit:
                return finish(TIME_LIMIT)

            if dive is not None:
                batch, dive = [dive], None
            else:
                batch = [heapq.heappop(heap)]
                while pool is not None and heap and len(batch) < threads:
                    batch.append(heapq.heappop(heap))
            keep = [nd for nd in batch if nd.bound > incumbent + prune_slack(incumbent, rel_gap)]
            for nd in batch:
                if nd not in keep:
                    pruned[0] = max(pruned[0], nd.bound)
            batch = keep
            if not batch:
                continue
            sols = list(pool.map(solve_node, batch)) if pool else [solve_node(batch[0])]
            nodes += len(batch)

            for node, sol in zip(batch, sols):
                if sol.status == INFEASIBLE:
                    continue
                if sol.status == UNBOUNDED:
                    raise SolverError("LP relaxation unbounded; bounds must be finite")
                obj = min(sol.objective, node.bound)
                if obj <= incumbent + prune_slack(incumbent, rel_gap):
                    pruned[0] = max(pruned[0], obj)
                    continue
                xb = sol.x[bins]
                frac = np.abs(xb - np.round(xb))
                if frac.max(initial=0.0) <= tol.integrality:
                    incumbent, best_x = sol.objective, sol.x.copy()
                    if on_incumbent is not None:
                        on_incumbent(best_x)
                    slack = prune_slack(incumbent, rel_gap)
                    pruned[0] = max([pruned[0]] + [nd.bound for nd in heap if nd.bound <= incumbent + slack])
                    heap = [nd for nd in heap if nd.bound > incumbent + slack]
                    heapq.heapify(heap)
                    continue
                # most fractional: distance to 0.5 smallest, lowest index first
                k = int(np.argmin(np.abs(xb - 0.5)))
                j = int(bins[k])
                down_ub = node.ub.copy()
                down_ub[j] = 0.0
                up_lb = node.lb.copy()
                up_lb[j] = 1.0
                down = _Node(-obj, next(counter), obj, node.lb, down_ub, node.depth + 1)
                up = _Node(-obj, next(counter), obj, up_lb, node.ub, node.depth + 1)
                if not np.isfinite(incumbent) and pool is None and dive is None:
                    first, second = (up, down) if sol.x[j] >= 0.5 else (down, up)
                    dive = first
                    heapq.heappush(heap, second)
                else:
                    heapq.heappush(heap, down)
                    heapq.heappush(heap, up)
            if record_history:
                history.append((max(open_bound(), incumbent), incumbent))
    finally:
        if pool is not None:
            pool.shutdown()

    if not np.isfinite(incumbent):
        return finish(INFEASIBLE_STATUS)
    return finish(OPTIMAL_STATUS)


def prune_slack(incumbent: float, rel_gap: float) -> float:
    """Nodes whose bound cannot beat the incumbent by more than the gap are dropped."""
    if not np.isfinite(incumbent):
        return 0.0
    return rel_gap * max(abs(incumbent), GAP_EPS)
