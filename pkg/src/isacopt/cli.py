"""Command-line entry point: ``isacopt {sweep, beampattern, oracle-check, export-lp}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .codebook import codebook_for
from .experiments import (METHODS, ConfigError, VerificationError, describe, load_experiment,
                          resolve_path, run_beampattern_case, run_sweep)
from .milp.model import write_lp
from .oracle import BudgetExceeded
from .reformulation import build_milp
from .scenario import ScenarioError, load_scenario, normalize
from .solve import SolverConfig
from .tiny import compare_with_oracle, tiny_scenario

log = logging.getLogger("isacopt")


def _methods(text: str | None) -> tuple[str, ...] | None:
    if text is None:
        return None
    ms = tuple(m.strip().upper() for m in text.split(",") if m.strip())
    bad = [m for m in ms if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown methods {bad}; choose from {','.join(METHODS)}")
    return ms


def _solver_overrides(cfg: SolverConfig, args) -> SolverConfig:
    changes = {}
    if args.gap is not None:
        changes["rel_gap"] = args.gap
    if getattr(args, "time_limit", None) is not None:
        changes["time_limit"] = args.time_limit
    if getattr(args, "backend", None) is not None:
        changes["lp_backend"] = args.backend
    return replace(cfg, **changes)


def cmd_sweep(args) -> int:
    cfg = load_experiment(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.methods:
        cfg.methods = args.methods
    if args.out is not None:
        cfg.out_dir = Path(args.out)
    if args.realizations is not None:
        cfg.realizations = args.realizations
    cfg.solver = _solver_overrides(cfg.solver, args)
    cfg.validate()
    res = run_sweep(cfg, workers=args.threads, figures=not args.no_figures)
    for row in res.summary:
        print(f"{row['method']:>4} {row['sweep_variable']}={float(row['sweep_value']):g}  "
              f"feasible {row['feasible_count']}/{row['realizations']}  mean tau {row['mean_tau'] or '-'}")
    for name, path in res.files.items():
        print(f"wrote {name}: {path}")
    for v in res.violations:
        print(f"DOMINANCE VIOLATION: {v}", file=sys.stderr)
    return 1 if res.violations else 0


def cmd_beampattern(args) -> int:
    solver = _solver_overrides(SolverConfig(phase_anchor=True), args)
    res = run_beampattern_case(args.config, args.out or "results/beampattern", solver,
                               figures=not args.no_figures)
    print(describe(res.outcome.allocation, res.outcome.report))
    for name, path in res.files.items():
        print(f"wrote {name}: {path}")
    return 0


def cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    solver = _solver_overrides(SolverConfig(rel_gap=1e-9), args)
    failures = 0
    for i in range(args.instances):
        sc = tiny_scenario(rng)
        cmp = compare_with_oracle(sc, solver)
        failures += not cmp.agree
        print(f"[{i:3d}] {cmp.describe()}")
    print(f"{args.instances - failures}/{args.instances} instances agree")
    return 1 if failures else 0


def cmd_export_lp(args) -> int:
    sc = load_scenario(resolve_path(args.config))
    ns, cb = normalize(sc), codebook_for(sc)
    model, _ = build_milp(ns, cb, bigm=args.bigm, phase_anchor=args.phase_anchor)
    out = Path(args.out or "model.lp")
    write_lp(model, out)
    print(f"wrote {out}: {model.n_vars} variables, {model.n_rows} rows")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isacopt", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="YAML file (path or packaged name)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--gap", type=float, help="relative optimality gap")
        sp.add_argument("--out", help="output directory or file")
        sp.add_argument("--threads", type=int, default=1, help="worker processes")

    sp = sub.add_parser("sweep", help="run a parameter sweep over random realizations")
    common(sp)
    sp.add_argument("--methods", type=_methods, help="comma list from OPT,BL1,BL2,BL3,BL4")
    sp.add_argument("--realizations", type=int)
    sp.add_argument("--time-limit", type=float, dest="time_limit")
    sp.add_argument("--backend", choices=("auto", "simplex", "highs"))
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("beampattern", help="solve a fixed scenario and write its beampatterns")
    common(sp)
    sp.add_argument("--time-limit", type=float, dest="time_limit")
    sp.add_argument("--backend", choices=("auto", "simplex", "highs"))
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_beampattern)

    sp = sub.add_parser("oracle-check", help="compare MILP and exhaustive search on tiny instances")
    common(sp, config_required=False)
    sp.add_argument("--instances", type=int, default=50)
    sp.add_argument("--backend", choices=("auto", "simplex", "highs"))
    sp.set_defaults(func=cmd_oracle_check)

    sp = sub.add_parser("export-lp", help="write the MILP of a scenario file in LP format")
    common(sp)
    sp.add_argument("--bigm", choices=("safe", "paper"), default="safe")
    sp.add_argument("--phase-anchor", action="store_true")
    sp.set_defaults(func=cmd_export_lp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ScenarioError, BudgetExceeded, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
