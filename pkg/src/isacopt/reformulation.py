"""Exact MILP model of joint scheduling, pairing and phase-only beamforming.

Decision variables follow the lifted formulation: one-hot phase selectors
``x[u, n, :]``, lifted pair products ``Y[u, (n, m), l, i]`` (continuous, integral
by total unimodularity once ``x`` is), and the upper triangle of each rank-one
``W_u = w_u w_u^H`` stored as real/imaginary parts. Hermitian symmetry of
``W_u`` is structural: the lower triangle is never materialized.

Row families (names used as row-name prefixes):

=====  =============================================================
C2     sum_u mu_u = K
C4     sum_t lam_t = J
C6     sum_u rho_ut = lam_t
C7     sum_t rho_ut <= mu_u
D2     sum_l x_unl = mu_u
E2     big-M SINR threshold per user
G3     W_u[n, n] = delta^2 mu_u
H2     W_u[n, m] = Tr(S Y_unm), split into real and imaginary rows
I1/I2  column / row sums of Y_unm equal x_um / x_un
J1     big-M lower bound tau <= Tr(G_t W_u) when (t, u) is a scheduled pair
K1-K3  pi_tq = lam_t lam_q
K5     big-M cross-interference bound Tr(G_q W_u) <= xi when active
=====  =============================================================
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .allocation import Allocation
from .codebook import PhaseCodebook
from .milp.model import EQ, GE, LE, MilpModel
from .scenario import NormalizedScenario

BIGM_MODES = ("safe", "paper")


class ReformulationError(ValueError):
    pass


class DecodeError(RuntimeError):
    """Primal point does not decode to a consistent allocation."""


@dataclass(frozen=True, eq=False)
class VariableIndex:
    n_users: int
    n_targets: int
    n_antennas: int
    n_symbols: int
    n_rf_chains: int
    n_sched_targets: int
    mu: np.ndarray          # (U,)
    lam: np.ndarray         # (T,)
    rho: np.ndarray         # (U, T)
    pi: np.ndarray          # (T, T), -1 on the diagonal
    tau: int
    x: np.ndarray           # (U, N, L)
    w_diag: np.ndarray      # (U, N)
    w_re: np.ndarray        # (U, P)
    w_im: np.ndarray        # (U, P)
    y: np.ndarray           # (U, P, L, L) indexed [.., l, i] with l <-> x_un, i <-> x_um
    pairs: tuple[tuple[int, int], ...]
    n_vars: int

    def binaries(self) -> np.ndarray:
        return np.concatenate([self.mu, self.lam, self.rho.ravel(), self.x.ravel()])


def expected_counts(U: int, T: int, N: int, L: int) -> dict[str, int]:
    """Closed-form variable and row counts of the model."""
    P = N * (N - 1) // 2
    return {
        "x": U * N * L,
        "y": U * P * L * L,
        "w": U * (N + 2 * P),
        "pi": T * (T - 1),
        "vars": U + T + U * T + T * (T - 1) + 1 + U * N * L + U * (N + 2 * P) + U * P * L * L,
        "C2": 1, "C4": 1, "C6": T, "C7": U, "D2": U * N, "E2": U, "G3": U * N,
        "H2": 2 * U * P, "I1": U * P * L, "I2": U * P * L, "J1": U * T,
        "K1": T * (T - 1), "K2": T * (T - 1), "K3": T * (T - 1), "K5": U * T * (T - 1),
    }


def trace_coefficients(A: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Real coefficients of ``Tr(A W)`` over (diag, Re upper, Im upper) of Hermitian ``W``.

    The complex coefficient of every real variable is accumulated in full and
    its imaginary part is checked to cancel; a non-Hermitian ``A`` fails here.
    """
    N = A.shape[0]
    iu, ju = np.triu_indices(N, k=1)
    c_diag = np.diag(A).astype(complex)
    # W[n,m] = re + j im appears with A[m,n]; W[m,n] = re - j im appears with A[n,m]
    c_re = A[ju, iu] + A[iu, ju]
    c_im = 1j * A[ju, iu] - 1j * A[iu, ju]
    scale = max(1.0, float(np.abs(A).max()))
    for part in (c_diag, c_re, c_im):
        if part.size and np.abs(part.imag).max() > tol * scale:
            raise ReformulationError("trace form has a non-vanishing imaginary part; "
                                     "matrix is not Hermitian")
    return c_diag.real.copy(), c_re.real.copy(), c_im.real.copy()


def bigM_sinr(ns: NormalizedScenario, u: int) -> float:
    """Upper bound on the left side of the SINR row: total power times Tr(H_u), plus one."""
    return float(ns.tx_power * np.trace(ns.H[u]).real + 1.0)


def bigM_dpg(ns: NormalizedScenario, t: int) -> float:
    """Largest DPG any single full-power beam can deliver to target ``t``."""
    return float(ns.tx_power / ns.n_rf_chains * np.trace(ns.G[t]).real)


def pairing_bigM(ns: NormalizedScenario, t: int, mode: str = "safe") -> float:
    """Slack unit of the J1 rows for target ``t``.

    The rows relax by ``(2 - lam_t - rho_ut) M``. With ``lam_t = 0`` the slack
    is ``2M`` and must still cover tau, which can reach the DPG bound of the
    strongest target, so ``M`` is lifted to at least half of that.
    """
    d = bigM_dpg(ns, t)
    if mode == "paper":
        return d
    return max(d, 0.5 * max(bigM_dpg(ns, s) for s in range(ns.n_targets)))


def cross_bigM(ns: NormalizedScenario, t: int, q: int, mode: str = "safe") -> float:
    """Slack unit of the K5 row for (t, q); its left side Tr(G_q W_u) is bounded by D_q."""
    if mode == "paper":
        return bigM_dpg(ns, t)
    return bigM_dpg(ns, q)


def build_milp(ns: NormalizedScenario, cb: PhaseCodebook, bigm: str = "safe",
               phase_anchor: bool = False) -> tuple[MilpModel, VariableIndex]:
    """Assemble the MILP.

    ``bigm="paper"`` reproduces the published relaxation constants, which are
    not valid for every instance (see :func:`pairing_bigM`, :func:`cross_bigM`).
    ``phase_anchor`` adds ``x[u, 0, 0] = mu_u``: every ``W_u`` is unchanged by a
    common rotation of user ``u``'s phases, so pinning antenna 0 to the first
    symbol keeps the optimal value and removes ``L``-fold duplicate subtrees.
    """
    if bigm not in BIGM_MODES:
        raise ReformulationError(f"bigm must be one of {BIGM_MODES}")
    U, T, N = ns.n_users, ns.n_targets, ns.n_antennas
    K, J = ns.n_rf_chains, ns.n_sched_targets
    L = cb.size
    if cb.size != 2 ** ns.phase_bits:
        raise ReformulationError("codebook size does not match the scenario's phase bits")
    if not np.isclose(cb.magnitude ** 2 * K * N, ns.tx_power, rtol=1e-12):
        raise ReformulationError("codebook magnitude inconsistent with P_tx, K, N")
    if ns.h.shape != (U, N) or ns.G.shape != (T, N, N):
        raise ReformulationError("dimension mismatch between channels/targets and counts")
    if J > min(K, T):
        raise ReformulationError(f"J={J} exceeds min(K, T)")

    d2 = cb.magnitude ** 2
    pairs = tuple(combinations(range(N), 2))
    P = len(pairs)
    dbar = np.array([bigM_dpg(ns, t) for t in range(T)])

    m = MilpModel()
    mu = np.array([m.add_var(f"mu_{u}", binary=True) for u in range(U)], dtype=int)
    lam = np.array([m.add_var(f"lam_{t}", binary=True) for t in range(T)], dtype=int)
    rho = np.array([[m.add_var(f"rho_{u}_{t}", binary=True) for t in range(T)]
                    for u in range(U)], dtype=int)
    pi = -np.ones((T, T), dtype=int)
    for t in range(T):
        for q in range(T):
            if t != q:
                pi[t, q] = m.add_var(f"pi_{t}_{q}", 0.0, 1.0)
    tau = m.add_var("tau", 0.0, float(dbar.max()))
    x = np.array([[[m.add_var(f"x_{u}_{n}_{l}", binary=True) for l in range(L)]
                   for n in range(N)] for u in range(U)], dtype=int).reshape(U, N, L)
    w_diag = np.array([[m.add_var(f"Wd_{u}_{n}", 0.0, d2) for n in range(N)]
                       for u in range(U)], dtype=int).reshape(U, N)
    w_re = np.array([[m.add_var(f"Wr_{u}_{n}_{k}", -d2, d2) for n, k in pairs]
                     for u in range(U)], dtype=int).reshape(U, P)
    w_im = np.array([[m.add_var(f"Wi_{u}_{n}_{k}", -d2, d2) for n, k in pairs]
                     for u in range(U)], dtype=int).reshape(U, P)
    y = np.array([[[[m.add_var(f"Y_{u}_{n}_{k}_{l}_{i}", 0.0, 1.0) for i in range(L)]
                    for l in range(L)] for n, k in pairs] for u in range(U)],
                 dtype=int).reshape(U, P, L, L)

    def trace_row(A: np.ndarray, u: int, scale: float = 1.0) -> list[tuple[int, float]]:
        cd, cr, ci = trace_coefficients(A)
        return (list(zip(w_diag[u], scale * cd)) + list(zip(w_re[u], scale * cr))
                + list(zip(w_im[u], scale * ci)))

    # scheduling and pairing
    m.add_constr({int(j): 1.0 for j in mu}, EQ, K, "C2")
    m.add_constr({int(j): 1.0 for j in lam}, EQ, J, "C4")
    for t in range(T):
        m.add_constr([(rho[u, t], 1.0) for u in range(U)] + [(lam[t], -1.0)], EQ, 0.0, f"C6_{t}")
    for u in range(U):
        m.add_constr([(rho[u, t], 1.0) for t in range(T)] + [(mu[u], -1.0)], LE, 0.0, f"C7_{u}")

    # one-hot phase selection
    for u in range(U):
        for n in range(N):
            m.add_constr([(j, 1.0) for j in x[u, n]] + [(mu[u], -1.0)], EQ, 0.0, f"D2_{u}_{n}")

    # SINR: sum_{i!=u} Tr(H_u W_i) - Tr(H_u W_u)/Gamma_u + B_u mu_u <= B_u - 1
    for u in range(U):
        B = bigM_sinr(ns, u)
        row: list[tuple[int, float]] = []
        for i in range(U):
            row += trace_row(ns.H[u], i, -1.0 / ns.sinr_thresholds[u] if i == u else 1.0)
        row.append((mu[u], B))
        m.add_constr(row, LE, B - 1.0, f"E2_{u}")

    # lifted rank-one structure
    for u in range(U):
        for n in range(N):
            m.add_constr({w_diag[u, n]: 1.0, mu[u]: -d2}, EQ, 0.0, f"G3_{u}_{n}")
    S = cb.gram
    for u in range(U):
        for p, (n, k) in enumerate(pairs):
            # Tr(S Y) = sum_{l,i} S[i, l] Y[l, i]
            coef = S.T
            yy = y[u, p]
            m.add_constr([(w_re[u, p], 1.0)] + list(zip(yy.ravel(), -coef.real.ravel())),
                         EQ, 0.0, f"H2re_{u}_{n}_{k}")
            m.add_constr([(w_im[u, p], 1.0)] + list(zip(yy.ravel(), -coef.imag.ravel())),
                         EQ, 0.0, f"H2im_{u}_{n}_{k}")
            for i in range(L):
                m.add_constr([(yy[l, i], 1.0) for l in range(L)] + [(x[u, k, i], -1.0)],
                             EQ, 0.0, f"I1_{u}_{n}_{k}_{i}")
            for l in range(L):
                m.add_constr([(yy[l, i], 1.0) for i in range(L)] + [(x[u, n, l], -1.0)],
                             EQ, 0.0, f"I2_{u}_{n}_{k}_{l}")

    # DPG: tau - Tr(G_t W_u) + M lam_t + M rho_ut <= 2 M
    for u in range(U):
        for t in range(T):
            M = pairing_bigM(ns, t, bigm)
            row = [(tau, 1.0)] + trace_row(ns.G[t], u, -1.0) + [(lam[t], M), (rho[u, t], M)]
            m.add_constr(row, LE, 2.0 * M, f"J1_{u}_{t}")

    # cross-interference among scheduled targets
    for t in range(T):
        for q in range(T):
            if t == q:
                continue
            m.add_constr({pi[t, q]: 1.0, lam[t]: -1.0}, LE, 0.0, f"K1_{t}_{q}")
            m.add_constr({pi[t, q]: 1.0, lam[q]: -1.0}, LE, 0.0, f"K2_{t}_{q}")
            m.add_constr({pi[t, q]: 1.0, lam[t]: -1.0, lam[q]: -1.0}, GE, -1.0, f"K3_{t}_{q}")
    xi = ns.cross_interference_threshold
    for u in range(U):
        for t in range(T):
            for q in range(T):
                if t == q:
                    continue
                M = cross_bigM(ns, t, q, bigm)
                row = trace_row(ns.G[q], u) + [(pi[t, q], M), (rho[u, t], M)]
                m.add_constr(row, LE, xi + 2.0 * M, f"K5_{u}_{t}_{q}")

    if phase_anchor:
        for u in range(U):
            m.add_constr({x[u, 0, 0]: 1.0, mu[u]: -1.0}, EQ, 0.0, f"SB_{u}")

    m.set_objective({tau: 1.0})
    m.validate()
    index = VariableIndex(
        n_users=U, n_targets=T, n_antennas=N, n_symbols=L, n_rf_chains=K, n_sched_targets=J,
        mu=mu, lam=lam, rho=rho, pi=pi, tau=tau, x=x, w_diag=w_diag, w_re=w_re, w_im=w_im,
        y=y, pairs=pairs, n_vars=m.n_vars,
    )
    return m, index


def row_family_counts(model: MilpModel) -> dict[str, int]:
    counts: dict[str, int] = {}
    for name in model.row_names:
        fam = name.split("_")[0]
        fam = "H2" if fam.startswith("H2") else fam
        counts[fam] = counts.get(fam, 0) + 1
    return counts


def decode_solution(values: np.ndarray, index: VariableIndex, cb: PhaseCodebook,
                    atol: float = 1e-6) -> Allocation:
    """Round the binaries and rebuild beams from the one-hot selectors.

    The rebuilt ``w_u w_u^H`` is compared with the solved ``W_u`` entries
    (relative to ``delta^2``); disagreement means the model or the solver is
    broken, not that the instance is hard.
    """
    v = np.asarray(values, dtype=float)
    U, T, N, L = index.n_users, index.n_targets, index.n_antennas, index.n_symbols
    mu = v[index.mu] > 0.5
    lam = v[index.lam] > 0.5
    rho = v[index.rho] > 0.5
    xs = v[index.x] > 0.5
    if mu.sum() != index.n_rf_chains:
        raise DecodeError(f"C2 violated: {mu.sum()} users scheduled, expected {index.n_rf_chains}")
    if lam.sum() != index.n_sched_targets:
        raise DecodeError(f"C4 violated: {lam.sum()} targets scheduled, "
                          f"expected {index.n_sched_targets}")
    pairing: dict[int, int] = {}
    for t in range(T):
        users = np.flatnonzero(rho[:, t])
        if len(users) != int(lam[t]):
            raise DecodeError(f"C6 violated for target {t}")
        if len(users):
            pairing[t] = int(users[0])
    for u in range(U):
        if rho[u].sum() > int(mu[u]):
            raise DecodeError(f"C7 violated for user {u}")

    beams = np.zeros((U, N), dtype=complex)
    for u in range(U):
        for n in range(N):
            sel = xs[u, n].astype(int)
            if sel.sum() != int(mu[u]):
                raise DecodeError(f"D2 violated at user {u}, antenna {n}")
            beams[u, n] = cb.decode_entry(sel)

    d2 = cb.magnitude ** 2
    iu, ju = np.array(index.pairs, dtype=int).reshape(-1, 2).T if index.pairs else ([], [])
    for u in range(U):
        outer = np.outer(beams[u], beams[u].conj())
        err_d = np.abs(outer.diagonal().real - v[index.w_diag[u]]).max(initial=0.0)
        err_o = 0.0
        if index.pairs:
            sol = v[index.w_re[u]] + 1j * v[index.w_im[u]]
            err_o = np.abs(outer[iu, ju] - sol).max()
        if max(err_d, err_o) > atol * max(d2, 1.0):
            raise DecodeError(f"W_{u} disagrees with w w^H by {max(err_d, err_o):.3g}")
    return Allocation(
        scheduled_users=tuple(int(u) for u in np.flatnonzero(mu)),
        scheduled_targets=tuple(int(t) for t in np.flatnonzero(lam)),
        pairing=pairing, beams=beams, tau=float(v[index.tau]),
    )


def allocation_to_values(alloc: Allocation, index: VariableIndex, cb: PhaseCodebook,
                         ns: NormalizedScenario) -> np.ndarray:
    """Lift an allocation to a full primal point of the model (inverse of decoding)."""
    v = np.zeros(index.n_vars)
    U, T = index.n_users, index.n_targets
    for u in alloc.scheduled_users:
        v[index.mu[u]] = 1.0
    for t in alloc.scheduled_targets:
        v[index.lam[t]] = 1.0
    for t, u in alloc.pairing.items():
        v[index.rho[u, t]] = 1.0
    for t in range(T):
        for q in range(T):
            if t != q:
                v[index.pi[t, q]] = v[index.lam[t]] * v[index.lam[q]]
    v[index.tau] = alloc.tau
    sel = np.zeros((U, index.n_antennas), dtype=int) - 1
    for u in alloc.scheduled_users:
        for n in range(index.n_antennas):
            k = cb.index_of(alloc.beams[u, n])
            if k is None:
                raise DecodeError(f"beam entry ({u}, {n}) is not a codebook symbol")
            sel[u, n] = k
            v[index.x[u, n, k]] = 1.0
        w = alloc.beams[u]
        v[index.w_diag[u]] = np.abs(w) ** 2
        for p, (n, k) in enumerate(index.pairs):
            z = w[n] * np.conj(w[k])
            v[index.w_re[u, p]] = z.real
            v[index.w_im[u, p]] = z.imag
            v[index.y[u, p, sel[u, n], sel[u, k]]] = 1.0
    return v
