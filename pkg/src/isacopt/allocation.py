from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Allocation:
    """A decoded schedule: who is served, who illuminates which target, and the beams.

    ``pairing`` maps target index -> user index. ``beams`` has one row per
    user (all users, zero rows for unscheduled ones).
    """

    scheduled_users: tuple[int, ...]
    scheduled_targets: tuple[int, ...]
    pairing: dict[int, int]
    beams: np.ndarray
    tau: float
    meta: dict = field(default_factory=dict)

    def illuminating_beam(self, t: int) -> np.ndarray:
        u = self.pairing.get(t)
        if u is None:
            return np.zeros(self.beams.shape[1], dtype=complex)
        return self.beams[u]

    def summary(self) -> str:
        pairs = ", ".join(f"T{t + 1}<-U{u + 1}" for t, u in sorted(self.pairing.items()))
        users = ", ".join(f"U{u + 1}" for u in self.scheduled_users)
        return f"users [{users}]  pairs [{pairs}]  tau={self.tau:.6g}"
