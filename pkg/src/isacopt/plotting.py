"""Figure rendering for the report paths (files only, no display)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .allocation import Allocation  # noqa: E402
from .evaluator import beampattern  # noqa: E402
from .scenario import Scenario  # noqa: E402

AXIS_LABELS = {"tx_power_dbm": "Transmit power $P_{tx}$ (dBm)",
               "sinr_threshold": r"SINR threshold $\Gamma_{th}$"}
MARKERS = {"OPT": "o", "BL1": "s", "BL2": "^", "BL3": "v", "BL4": "D"}


def _series(summary: Sequence[Mapping], key: str) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    out: dict[str, tuple[list, list]] = {}
    for row in summary:
        xs, ys = out.setdefault(row["method"], ([], []))
        xs.append(float(row["sweep_value"]))
        ys.append(float(row[key]) if row[key] != "" else np.nan)
    return {m: (np.array(x), np.array(y)) for m, (x, y) in out.items()}


def plot_sweep(summary: Sequence[Mapping], variable: str, out_dir: Path, title: str = "") -> dict[str, Path]:
    files = {}
    for key, ylabel, stem in (("mean_tau", r"Mean min-DPG $\tau$", "tau"),
                              ("feasibility_rate", "Feasibility rate", "feasibility")):
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for method, (x, y) in _series(summary, key).items():
            ax.plot(x, y, marker=MARKERS.get(method, "o"), label=method)
        ax.set_xlabel(AXIS_LABELS.get(variable, variable))
        ax.set_ylabel(ylabel)
        ax.grid(alpha=0.3)
        ax.legend()
        if title:
            ax.set_title(title)
        path = Path(out_dir) / f"{stem}_vs_{variable}.png"
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        files[f"fig_{stem}"] = path
    return files


def plot_beampattern(sc: Scenario, alloc: Allocation, grid: np.ndarray, out_dir: Path) -> dict[str, Path]:
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for u in alloc.scheduled_users:
        gain = beampattern(alloc.beams[u], grid)
        ax.plot(grid, 10 * np.log10(np.maximum(gain, 1e-12)), label=f"user {u + 1}")
    for t, th in enumerate(sc.target_angles):
        style = "-" if t in alloc.pairing else ":"
        ax.axvline(th, color="k", ls=style, lw=0.8)
        ax.annotate(f"T{t + 1}", (th, 1.0), xycoords=("data", "axes fraction"),
                    ha="center", va="bottom", fontsize=8)
    for u, beta in enumerate(sc.meta.get("los_angles_deg", [])):
        ax.plot([beta], [ax.get_ylim()[0]], marker="^", color="gray")
    ax.set_xlabel(r"Angle $\theta$ (deg)")
    ax.set_ylabel(r"$|a(\theta)^H w|^2$ (dB)")
    ax.set_xlim(0, 180)
    ax.grid(alpha=0.3)
    ax.legend()
    path = Path(out_dir) / "beampattern.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return {"fig_beampattern": path}
