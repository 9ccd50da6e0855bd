"""Solver-agnostic MILP container (maximization, finite bounds, sparse rows)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

LE, EQ, GE = "<=", "==", ">="
_SENSES = (LE, EQ, GE)


class ModelError(ValueError):
    pass


@dataclass
class MilpModel:
    """Variables with bounds and integrality, linear rows, linear objective (maximized).

    Rows are kept as sparse coefficient lists. Call :meth:`arrays` for the
    CSR form consumed by the LP solvers; it is cached until the next edit.
    """

    var_names: list[str] = field(default_factory=list)
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    binary: list[bool] = field(default_factory=list)
    rows: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    senses: list[str] = field(default_factory=list)
    rhs: list[float] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    _cache: tuple | None = field(default=None, repr=False)

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_var(self, name: str, lb: float = 0.0, ub: float = 1.0, binary: bool = False) -> int:
        if binary and (lb, ub) != (0.0, 1.0):
            raise ModelError(f"binary variable {name} must have bounds [0, 1]")
        if not (math.isfinite(lb) and math.isfinite(ub)) or lb > ub:
            raise ModelError(f"variable {name} needs finite bounds lb <= ub, got [{lb}, {ub}]")
        self.var_names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.binary.append(bool(binary))
        self._cache = None
        return self.n_vars - 1

    def add_constr(self, coeffs: Mapping[int, float] | Iterable[tuple[int, float]],
                   sense: str, rhs: float, name: str = "") -> int:
        if sense not in _SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[int, float] = {}
        for j, a in items:
            acc[int(j)] = acc.get(int(j), 0.0) + float(a)
        idx = np.fromiter(acc.keys(), dtype=np.int64, count=len(acc))
        val = np.fromiter(acc.values(), dtype=float, count=len(acc))
        keep = val != 0.0
        idx, val = idx[keep], val[keep]
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_vars):
            raise ModelError(f"row {name or self.n_rows} references an unknown variable")
        if not (np.all(np.isfinite(val)) and math.isfinite(rhs)):
            raise ModelError(f"row {name or self.n_rows} has non-finite data")
        order = np.argsort(idx)
        self.rows.append((idx[order], val[order]))
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self.row_names.append(name or f"r{self.n_rows}")
        self._cache = None
        return self.n_rows - 1

    def set_objective(self, coeffs: Mapping[int, float]) -> None:
        self.objective = {int(j): float(a) for j, a in coeffs.items() if a != 0.0}
        self._cache = None

    def validate(self) -> None:
        for j, (lo, hi, b) in enumerate(zip(self.lb, self.ub, self.binary)):
            if b and (lo < 0 or hi > 1):
                raise ModelError(f"binary {self.var_names[j]} has bounds outside [0, 1]")
        for j in self.objective:
            if not 0 <= j < self.n_vars:
                raise ModelError(f"objective references unknown variable {j}")

    def arrays(self):
        """``(c, A_csr, senses, b, lb, ub, is_binary)`` as numpy/scipy objects."""
        if self._cache is None:
            m, n = self.n_rows, self.n_vars
            indptr = np.zeros(m + 1, dtype=np.int64)
            for i, (idx, _) in enumerate(self.rows):
                indptr[i + 1] = indptr[i] + idx.size
            indices = np.concatenate([r[0] for r in self.rows]) if m else np.zeros(0, np.int64)
            data = np.concatenate([r[1] for r in self.rows]) if m else np.zeros(0)
            A = sp.csr_matrix((data, indices, indptr), shape=(m, n))
            c = np.zeros(n)
            for j, a in self.objective.items():
                c[j] = a
            self._cache = (c, A, np.array(self.senses), np.array(self.rhs),
                           np.array(self.lb), np.array(self.ub), np.array(self.binary))
        return self._cache

    def with_bounds(self, fixes: Mapping[int, tuple[float, float]]) -> "MilpModel":
        """Copy sharing rows, with some variable bounds replaced."""
        lb, ub = list(self.lb), list(self.ub)
        for j, (lo, hi) in fixes.items():
            lb[j], ub[j] = float(lo), float(hi)
        return MilpModel(list(self.var_names), lb, ub, list(self.binary), self.rows,
                         self.senses, self.rhs, self.row_names, dict(self.objective))

    def relaxed(self) -> "MilpModel":
        out = self.with_bounds({})
        out.binary = [False] * self.n_vars
        return out

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.arrays()[1] @ np.asarray(x, dtype=float)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation of a primal point (0 when feasible)."""
        c, A, senses, b, lb, ub, _ = self.arrays()
        x = np.asarray(x, dtype=float)
        act = A @ x
        viol = np.zeros(self.n_rows)
        le, ge, eq = senses == LE, senses == GE, senses == EQ
        viol[le] = np.maximum(act[le] - b[le], 0.0)
        viol[ge] = np.maximum(b[ge] - act[ge], 0.0)
        viol[eq] = np.abs(act[eq] - b[eq])
        bnd = np.maximum(np.maximum(lb - x, x - ub), 0.0)
        return float(max(viol.max(initial=0.0), bnd.max(initial=0.0)))

    def objective_value(self, x: np.ndarray) -> float:
        return float(sum(a * x[j] for j, a in self.objective.items()))


def _fmt(v: float) -> str:
    return repr(float(v))


def write_lp(model: MilpModel, path) -> None:
    """CPLEX LP text. Rows and terms are emitted in index order so output is reproducible."""
    lines = ["\\ exported by isacopt", "Maximize"]
    obj = " + ".join(f"{_fmt(model.objective[j])} {model.var_names[j]}"
                     for j in sorted(model.objective)) or f"0 {model.var_names[0]}"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    op = {LE: "<=", GE: ">=", EQ: "="}
    for (idx, val), sense, b, name in zip(model.rows, model.senses, model.rhs, model.row_names):
        terms = " + ".join(f"{_fmt(a)} {model.var_names[j]}" for j, a in zip(idx, val))
        lines.append(f" {name}: {terms or '0 ' + model.var_names[0]} {op[sense]} {_fmt(b)}")
    lines.append("Bounds")
    for j, name in enumerate(model.var_names):
        lines.append(f" {_fmt(model.lb[j])} <= {name} <= {_fmt(model.ub[j])}")
    bins = [model.var_names[j] for j in range(model.n_vars) if model.binary[j]]
    if bins:
        lines.append("Binaries")
        lines.extend(f" {b}" for b in bins)
    lines.append("End")
    text = "\n".join(lines).replace("+ -", "- ") + "\n"
    with open(path, "w") as fh:
        fh.write(text)
