"""Sweep and single-case experiment runners with CSV output.

CSV schema (version 1)

``detail.csv``: one row per (method, sweep value, realization)
    method, sweep_variable, sweep_value, realization, status, feasible,
    tau, bound, gap, nodes, users, pairing

``aggregate.csv``: one row per (method, sweep value)
    method, sweep_variable, sweep_value, realizations, feasible_count,
    feasibility_rate, mean_tau, mean_gap

``mean_tau`` and ``mean_gap`` average over feasible realizations only and are
empty when none is feasible. Wall-clock times live in ``timing.csv`` (same
keys plus ``wall_time_s``) and ``timing_summary.csv`` so that the two files
above are byte-identical across runs with the same seed.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from .allocation import Allocation
from .baselines import AGGREGATIONS, KINDS, run_baseline
from .codebook import PhaseCodebook, codebook_for
from .evaluator import beampattern, verify
from .scenario import (NormalizedScenario, RandomScenarioParams, Scenario, dbm_to_mw, load_scenario,
                       normalize, random_scenario)
from .solve import Outcome, SolverConfig, solve_allocation

SCHEMA_VERSION = 1
METHODS = ("OPT",) + KINDS
SWEEP_VARIABLES = ("tx_power_dbm", "sinr_threshold")
TAU_TOL = 1e-6
DATA_DIR = Path(__file__).parent / "data"

DETAIL_FIELDS = ("method", "sweep_variable", "sweep_value", "realization", "status", "feasible",
                 "tau", "bound", "gap", "nodes", "users", "pairing")
AGGREGATE_FIELDS = ("method", "sweep_variable", "sweep_value", "realizations", "feasible_count",
                    "feasibility_rate", "mean_tau", "mean_gap")


class ConfigError(ValueError):
    pass


class VerificationError(RuntimeError):
    """A returned allocation failed the direct constraint check: an implementation bug."""


@dataclass
class ExperimentConfig:
    template: RandomScenarioParams
    sweep_variable: str
    sweep_values: list[float]
    realizations: int = 1
    seed: int = 0
    methods: tuple[str, ...] = METHODS
    solver: SolverConfig = field(default_factory=SolverConfig)
    los_separation_deg: float | None = None
    bl2_aggregate: str = "max"
    out_dir: Path = Path("results")
    name: str = "sweep"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if not self.sweep_values:
            raise ConfigError("sweep values must be nonempty")
        if self.realizations < 1:
            raise ConfigError("realizations must be at least 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"unknown methods {bad}; choose from {METHODS}")
        if self.bl2_aggregate not in AGGREGATIONS:
            raise ConfigError(f"bl2_aggregate must be one of {AGGREGATIONS}")

    def params(self) -> RandomScenarioParams:
        if self.los_separation_deg is None:
            return self.template
        return replace(self.template, los_separation_deg=self.los_separation_deg)


def resolve_path(ref: str | Path, base: Path | None = None) -> Path:
    """Relative paths resolve against ``base``, then against the packaged data directory."""
    p = Path(ref)
    if p.is_absolute() or p.exists():
        return p
    for root in (base, DATA_DIR):
        if root is not None and (root / p).exists():
            return root / p
    raise ConfigError(f"cannot find {ref}")


def config_from_dict(tree: Mapping, base: Path | None = None) -> ExperimentConfig:
    tree = dict(tree)
    tpl = tree.pop("template", {})
    if isinstance(tpl, (str, Path)):
        tpl = yaml.safe_load(resolve_path(tpl, base).read_text()) or {}
    sweep = tree.pop("sweep", None)
    if not isinstance(sweep, Mapping) or "variable" not in sweep or "values" not in sweep:
        raise ConfigError("config needs sweep.variable and sweep.values")
    try:
        cfg = ExperimentConfig(
            template=RandomScenarioParams.from_dict(tpl),
            sweep_variable=str(sweep["variable"]),
            sweep_values=[float(v) for v in sweep["values"]],
            realizations=int(tree.pop("realizations", 1)),
            seed=int(tree.pop("seed", 0)),
            methods=tuple(tree.pop("methods", METHODS)),
            solver=SolverConfig.from_dict(tree.pop("solver", None)),
            los_separation_deg=tree.pop("los_separation_deg", None),
            bl2_aggregate=str(tree.pop("bl2_aggregate", "max")),
            out_dir=Path(tree.pop("out", "results")),
            name=str(tree.pop("name", "sweep")),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if tree:
        raise ConfigError(f"unknown config keys {sorted(tree)}")
    return cfg


def load_experiment(path: str | Path) -> ExperimentConfig:
    path = resolve_path(path)
    return config_from_dict(yaml.safe_load(path.read_text()) or {}, path.parent)


def _rng(seed: int, stream: int, realization: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, realization)))


def apply_sweep(sc: Scenario, variable: str, value: float) -> Scenario:
    if variable == "tx_power_dbm":
        return sc.with_updates(tx_power=dbm_to_mw(value))
    return sc.with_updates(sinr_thresholds=np.full(sc.n_users, float(value)))


def check_outcome(ns: NormalizedScenario, cb: PhaseCodebook, out: Outcome, label: str) -> None:
    if out.allocation is None:
        return
    rep = verify(ns, out.allocation, cb)
    tau = out.allocation.tau
    if not rep.ok or rep.tau_error > TAU_TOL * max(1.0, abs(tau)):
        raise VerificationError(f"{label}: {rep}")


def _fmt(v: float) -> str:
    return "" if v is None or not math.isfinite(v) else repr(float(v))


def _row(method: str, cfg: ExperimentConfig, value: float, r: int, out: Outcome) -> dict:
    rep, alloc = out.report, out.allocation
    feas = alloc is not None
    return {
        "method": method, "sweep_variable": cfg.sweep_variable, "sweep_value": repr(float(value)),
        "realization": r, "status": rep.status, "feasible": int(feas),
        "tau": _fmt(alloc.tau) if feas else "", "bound": _fmt(rep.bound),
        "gap": _fmt(rep.gap) if feas else "", "nodes": rep.nodes,
        "users": " ".join(str(u) for u in alloc.scheduled_users) if feas else "",
        "pairing": " ".join(f"{t}:{u}" for t, u in sorted(alloc.pairing.items())) if feas else "",
        "wall_time_s": rep.wall_time,
    }


def run_realization(cfg: ExperimentConfig, r: int) -> list[dict]:
    """All methods at all sweep points for one channel draw (common random numbers)."""
    base = random_scenario(cfg.params(), _rng(cfg.seed, 0, r))
    rows = []
    for value in cfg.sweep_values:
        sc = apply_sweep(base, cfg.sweep_variable, value)
        ns, cb = normalize(sc), codebook_for(sc)
        for method in cfg.methods:
            label = f"{method} value={value} realization={r}"
            if method == "OPT":
                out = solve_allocation(ns, cb, cfg.solver)
            else:
                rng = _rng(cfg.seed, 1 + KINDS.index(method), r)
                out = run_baseline(method, ns, cb, rng, cfg.solver, cfg.bl2_aggregate)
            check_outcome(ns, cb, out, label)
            rows.append(_row(method, cfg, value, r, out))
    return rows


def _sort_key(row: dict) -> tuple:
    return (METHODS.index(row["method"]), float(row["sweep_value"]), int(row["realization"]))


def aggregate(rows: Sequence[Mapping]) -> list[dict]:
    groups: dict[tuple, list[Mapping]] = {}
    for row in rows:
        groups.setdefault((row["method"], row["sweep_variable"], row["sweep_value"]), []).append(row)
    out = []
    for (method, var, value), grp in groups.items():
        feas = [g for g in grp if int(g["feasible"])]
        taus = [float(g["tau"]) for g in feas]
        gaps = [float(g["gap"]) for g in feas if g["gap"] != ""]
        out.append({
            "method": method, "sweep_variable": var, "sweep_value": value,
            "realizations": len(grp), "feasible_count": len(feas),
            "feasibility_rate": repr(len(feas) / len(grp)),
            "mean_tau": repr(float(np.mean(taus))) if taus else "",
            "mean_gap": repr(float(np.mean(gaps))) if gaps else "",
        })
    out.sort(key=lambda r: (METHODS.index(r["method"]), float(r["sweep_value"])))
    return out


def dominance_violations(rows: Sequence[Mapping]) -> list[str]:
    """Baseline results that beat the joint method's proven bound."""
    opt = {(r["sweep_value"], r["realization"]): r for r in rows if r["method"] == "OPT"}
    bad = []
    for r in rows:
        o = opt.get((r["sweep_value"], r["realization"]))
        if r["method"] == "OPT" or o is None or not int(r["feasible"]):
            continue
        if o["status"] == "infeasible":
            bad.append(f"{r['method']} feasible where OPT proved infeasible ({r['sweep_value']}, {r['realization']})")
        elif o["bound"] != "":
            limit = float(o["bound"])
            if float(r["tau"]) > limit + 1e-9 * max(1.0, abs(limit)):
                bad.append(f"{r['method']} tau {r['tau']} above OPT bound {limit} "
                           f"({r['sweep_value']}, {r['realization']})")
    return bad


def write_csv(path: Path, fields: Sequence[str], rows: Sequence[Mapping]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class SweepResult:
    rows: list[dict]
    summary: list[dict]
    violations: list[str]
    files: dict[str, Path]


def run_sweep(cfg: ExperimentConfig, workers: int = 1, figures: bool = True) -> SweepResult:
    """Run every realization, write the CSVs (and figures), return the rows.

    Raises :class:`VerificationError` if any solution fails the direct check.
    """
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(run_realization, [cfg] * cfg.realizations, range(cfg.realizations)))
    else:
        parts = [run_realization(cfg, r) for r in range(cfg.realizations)]
    rows = sorted((row for part in parts for row in part), key=_sort_key)
    summary = aggregate(rows)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"detail": out / "detail.csv", "aggregate": out / "aggregate.csv",
             "timing": out / "timing.csv", "timing_summary": out / "timing_summary.csv"}
    write_csv(files["detail"], DETAIL_FIELDS, rows)
    write_csv(files["aggregate"], AGGREGATE_FIELDS, summary)
    write_csv(files["timing"], ("method", "sweep_value", "realization", "wall_time_s"), rows)
    timing: dict[tuple, list[float]] = {}
    for r in rows:
        timing.setdefault((r["method"], r["sweep_value"]), []).append(r["wall_time_s"])
    write_csv(files["timing_summary"], ("method", "sweep_value", "mean_wall_time_s"),
              [{"method": m, "sweep_value": v, "mean_wall_time_s": float(np.mean(t))}
               for (m, v), t in timing.items()])
    if figures:
        from .plotting import plot_sweep
        files.update(plot_sweep(summary, cfg.sweep_variable, out, cfg.name))
    return SweepResult(rows, summary, dominance_violations(rows), files)


# ----------------------------------------------------------------------------
# single deterministic case
# ----------------------------------------------------------------------------

THETA_STEP = 0.25


def theta_grid(step: float = THETA_STEP) -> np.ndarray:
    """Open interval (0, 180) in ``step`` increments."""
    return np.arange(step, 180.0, step)


@dataclass
class BeampatternResult:
    scenario: Scenario
    outcome: Outcome
    files: dict[str, Path]


def beampattern_rows(alloc: Allocation, grid: np.ndarray) -> tuple[list[str], list[dict]]:
    U = alloc.beams.shape[0]
    fields = ["theta_deg"] + [f"gain_user{u + 1}" for u in range(U)]
    gains = np.stack([beampattern(alloc.beams[u], grid) for u in range(U)])
    rows = [{"theta_deg": repr(float(th)), **{f"gain_user{u + 1}": repr(float(gains[u, i]))
                                             for u in range(U)}}
            for i, th in enumerate(grid)]
    return fields, rows


def run_beampattern_case(path: str | Path, out_dir: str | Path,
                         solver: SolverConfig = SolverConfig(), figures: bool = True) -> BeampatternResult:
    """Solve the joint problem on a fixed scenario file and write its beampatterns."""
    sc = load_scenario(resolve_path(path))
    ns, cb = normalize(sc), codebook_for(sc)
    out = solve_allocation(ns, cb, solver)
    check_outcome(ns, cb, out, f"beampattern case {path}")
    files: dict[str, Path] = {}
    if out.allocation is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        grid = theta_grid()
        fields, rows = beampattern_rows(out.allocation, grid)
        files["beampattern"] = d / "beampattern.csv"
        write_csv(files["beampattern"], fields, rows)
        if figures:
            from .plotting import plot_beampattern
            files.update(plot_beampattern(sc, out.allocation, grid, d))
    return BeampatternResult(sc, out, files)


def describe(alloc: Allocation | None, report: Any) -> str:
    if alloc is None:
        return f"status={report.status}: no feasible allocation"
    return (f"status={report.status} gap={report.gap:.3g} nodes={report.nodes} "
            f"time={report.wall_time:.1f}s  {alloc.summary()}")
