"""Problem instances: array geometry, Rician user channels, point targets.

Powers live in milliwatts once loaded; files carry dBm. Channels are kept in
natural amplitude units until :func:`normalize` divides them by the noise
standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Invalid scenario input. ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def dbm_to_mw(dbm: float) -> float:
    return float(10.0 ** (dbm / 10.0))


def mw_to_dbm(mw: float) -> float:
    return float(10.0 * np.log10(mw))


def steering_vector(theta: float, n: int) -> np.ndarray:
    """Half-wavelength ULA response toward ``theta`` degrees, centred on the array."""
    if not 0.0 < theta < 180.0:
        raise ValueError(f"theta must lie in (0, 180) degrees, got {theta}")
    if n < 1:
        raise ValueError(f"antenna count must be >= 1, got {n}")
    k = np.arange(n)
    return np.exp(1j * np.pi * (2 * k - n + 1) / 2.0 * np.cos(np.deg2rad(theta)))


def target_response(theta: float, alpha: float, n: int) -> np.ndarray:
    if alpha <= 0:
        raise ValueError(f"reflection coefficient must be positive, got {alpha}")
    a = steering_vector(theta, n)
    return alpha * np.outer(a, a.conj())


def uma_path_loss_db(d: float, fc_ghz: float, shadowing_db: float = 0.0) -> float:
    """UMa path loss ``28 + 22 log10(d) + 20 log10(fc) + chi`` (d in m, fc in GHz)."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return 28.0 + 22.0 * np.log10(d) + 20.0 * np.log10(fc_ghz) + shadowing_db


@dataclass(frozen=True)
class ChannelModel:
    rician_k: float = 100.0
    carrier_ghz: float = 71.0
    shadowing_std_db: float = 4.0


def sample_channel(
    beta: float,
    d: float,
    rng: np.random.Generator | int | None,
    n: int,
    model: ChannelModel = ChannelModel(),
    shadowing_db: float | None = None,
) -> np.ndarray:
    """Draw one Rician user channel ``h = gamma * v``.

    ``gamma`` is the UMa path loss applied as an amplitude attenuation
    ``10**(-PL_dB/20)``. When ``shadowing_db`` is None it is drawn as a zero-mean
    Gaussian with standard deviation ``model.shadowing_std_db``. An infinite
    Rician factor returns the pure line-of-sight channel.
    """
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    rng = np.random.default_rng(rng)
    if shadowing_db is None:
        shadowing_db = float(rng.normal(0.0, model.shadowing_std_db))
    gamma = 10.0 ** (-uma_path_loss_db(d, model.carrier_ghz, shadowing_db) / 20.0)
    los = steering_vector(beta, n)
    nlos = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    kr = model.rician_k
    if np.isinf(kr):
        v = los
    else:
        v = (np.sqrt(kr) * los + nlos) / np.sqrt(kr + 1.0)
    return gamma * v


@dataclass(frozen=True, eq=False)
class Scenario:
    """One channel use worth of inputs, in natural units (mW, linear ratios)."""

    n_antennas: int
    n_users: int
    n_rf_chains: int
    n_targets: int
    n_sched_targets: int
    channels: np.ndarray
    noise_power: float
    target_angles: np.ndarray
    target_coeffs: np.ndarray
    sinr_thresholds: np.ndarray
    cross_interference_threshold: float
    tx_power: float
    phase_bits: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        setattr_ = object.__setattr__
        setattr_(self, "channels", np.asarray(self.channels, dtype=complex))
        for name in ("target_angles", "target_coeffs", "sinr_thresholds"):
            setattr_(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        self.validate()

    def validate(self) -> None:
        for name in ("n_antennas", "n_users", "n_rf_chains", "n_targets",
                     "n_sched_targets", "phase_bits"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ScenarioError(name, f"must be a positive integer, got {v}")
        N, U, K, T, J = (self.n_antennas, self.n_users, self.n_rf_chains,
                         self.n_targets, self.n_sched_targets)
        if K > U:
            raise ScenarioError("n_rf_chains", f"K={K} exceeds U={U}")
        if J > min(K, T):
            raise ScenarioError("n_sched_targets", f"J={J} exceeds min(K, T)={min(K, T)}")
        if self.channels.shape != (U, N):
            raise ScenarioError("channels", f"expected shape {(U, N)}, got {self.channels.shape}")
        if not np.all(np.isfinite(self.channels)):
            raise ScenarioError("channels", "non-finite entries")
        for name, size in (("target_angles", T), ("target_coeffs", T), ("sinr_thresholds", U)):
            arr = getattr(self, name)
            if arr.shape != (size,):
                raise ScenarioError(name, f"expected {size} entries, got {arr.size}")
        if not np.all((self.target_angles > 0) & (self.target_angles < 180)):
            raise ScenarioError("target_angles", "angles must lie in (0, 180) degrees")
        if not np.all(self.target_coeffs > 0):
            raise ScenarioError("target_coeffs", "reflection coefficients must be positive")
        if not np.all(self.sinr_thresholds > 0):
            raise ScenarioError("sinr_thresholds", "thresholds must be positive")
        for name in ("noise_power", "tx_power", "cross_interference_threshold"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ScenarioError(name, f"must be a positive finite number, got {v}")

    def with_updates(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class NormalizedScenario:
    """Scenario with channels divided by the noise std and Gram forms precomputed.

    ``H[u] = h~_u h~_u^H`` and ``G[t] = alpha_t a(theta_t) a(theta_t)^H``.
    """

    scenario: Scenario
    h: np.ndarray
    H: np.ndarray
    G: np.ndarray

    def __getattr__(self, name: str) -> Any:
        # forwards the scalar/array parameters of the underlying scenario
        if name == "scenario":
            raise AttributeError(name)
        return getattr(self.scenario, name)


def normalize(sc: Scenario) -> NormalizedScenario:
    h = sc.channels / np.sqrt(sc.noise_power)
    H = np.einsum("un,um->unm", h, h.conj())
    G = np.stack([target_response(th, al, sc.n_antennas)
                  for th, al in zip(sc.target_angles, sc.target_coeffs)])
    return NormalizedScenario(scenario=sc, h=h, H=H, G=G)


# ----------------------------------------------------------------------------
# file boundary
# ----------------------------------------------------------------------------

def _require(tree: Mapping, key: str, path: str) -> Any:
    if not isinstance(tree, Mapping) or key not in tree:
        raise ScenarioError(f"{path}{key}", "missing required field")
    return tree[key]


def _per_entity(value: Any, count: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(count, float(arr[0]))
    if arr.shape != (count,):
        raise ScenarioError(name, f"expected {count} values, got {arr.size}")
    return arr


def _parse_complex_rows(value: Any, name: str) -> np.ndarray:
    try:
        re = np.asarray(value["real"], dtype=float)
        im = np.asarray(value.get("imag", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ScenarioError(name, f"expected a mapping with 'real'/'imag' rows ({exc})") from None
    if re.shape != im.shape or re.ndim != 2:
        raise ScenarioError(name, "real and imag must be equally shaped 2-D arrays")
    return re + 1j * im


def scenario_from_dict(tree: Mapping, rng: np.random.Generator | int | None = None) -> Scenario:
    """Build a scenario from a parsed config tree.

    Channels are either given explicitly under ``users.channels`` (natural
    amplitude units) or sampled from ``users.los_angles_deg`` and
    ``users.distances_m`` with the ``channel`` block and the tree's ``seed``.
    """
    if not isinstance(tree, Mapping):
        raise ScenarioError("<root>", "config must be a mapping")
    version = tree.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError("version", f"unsupported schema version {version}")
    try:
        N = int(_require(tree, "n_antennas", ""))
        users = _require(tree, "users", "")
        targets = _require(tree, "targets", "")
        power = _require(tree, "power", "")
        U = int(_require(users, "count", "users."))
        K = int(_require(users, "rf_chains", "users."))
        T = int(_require(targets, "count", "targets."))
        J = int(_require(targets, "scheduled", "targets."))
        Q = int(_require(tree, "phase_bits", ""))
        xi = float(_require(tree, "cross_interference_threshold", ""))
        tx_dbm = float(_require(power, "tx_dbm", "power."))
        noise_dbm = float(_require(power, "noise_dbm", "power."))
        sinr = _per_entity(_require(users, "sinr_threshold", "users."), U, "users.sinr_threshold")
        angles = _per_entity(_require(targets, "angles_deg", "targets."), T, "targets.angles_deg")
        coeffs_raw = _require(targets, "reflection", "targets.")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError("<root>", f"malformed value ({exc})") from None
    if any(isinstance(c, complex) or (isinstance(c, str) and "j" in c)
           for c in np.atleast_1d(coeffs_raw).tolist()):
        raise ScenarioError("targets.reflection", "complex reflection coefficients are not supported")
    coeffs = _per_entity(coeffs_raw, T, "targets.reflection")

    meta: dict = {}
    if "channels" in users:
        channels = _parse_complex_rows(users["channels"], "users.channels")
    else:
        betas = _per_entity(_require(users, "los_angles_deg", "users."), U, "users.los_angles_deg")
        dists = _per_entity(_require(users, "distances_m", "users."), U, "users.distances_m")
        ch = tree.get("channel", {}) or {}
        model = ChannelModel(
            rician_k=float(ch.get("rician_k", 100.0)),
            carrier_ghz=float(ch.get("carrier_ghz", 71.0)),
            shadowing_std_db=float(ch.get("shadowing_std_db", 4.0)),
        )
        shadow = users.get("shadowing_db")
        shadow = None if shadow is None else _per_entity(shadow, U, "users.shadowing_db")
        if rng is None:
            rng = tree.get("seed", 0)
        gen = np.random.default_rng(rng)
        channels = np.stack([
            sample_channel(b, d, gen, N, model, None if shadow is None else shadow[u])
            for u, (b, d) in enumerate(zip(betas, dists))
        ])
        meta.update(los_angles_deg=betas.tolist(), distances_m=dists.tolist())
    meta["name"] = tree.get("name", "")
    return Scenario(
        n_antennas=N, n_users=U, n_rf_chains=K, n_targets=T, n_sched_targets=J,
        channels=channels, noise_power=dbm_to_mw(noise_dbm),
        target_angles=angles, target_coeffs=coeffs, sinr_thresholds=sinr,
        cross_interference_threshold=xi, tx_power=dbm_to_mw(tx_dbm), phase_bits=Q,
        meta=meta,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        tree = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError("<file>", f"cannot parse {path}: {exc}") from None
    return scenario_from_dict(tree)


def scenario_to_dict(sc: Scenario) -> dict:
    """Inverse of :func:`scenario_from_dict` with explicit channels."""
    return {
        "version": SCHEMA_VERSION,
        "name": sc.meta.get("name", ""),
        "n_antennas": sc.n_antennas,
        "phase_bits": sc.phase_bits,
        "cross_interference_threshold": sc.cross_interference_threshold,
        "power": {"tx_dbm": mw_to_dbm(sc.tx_power), "noise_dbm": mw_to_dbm(sc.noise_power)},
        "users": {
            "count": sc.n_users,
            "rf_chains": sc.n_rf_chains,
            "sinr_threshold": sc.sinr_thresholds.tolist(),
            "channels": {"real": sc.channels.real.tolist(), "imag": sc.channels.imag.tolist()},
        },
        "targets": {
            "count": sc.n_targets,
            "scheduled": sc.n_sched_targets,
            "angles_deg": sc.target_angles.tolist(),
            "reflection": sc.target_coeffs.tolist(),
        },
    }


# ----------------------------------------------------------------------------
# random instances
# ----------------------------------------------------------------------------

@dataclass
class RandomScenarioParams:
    """Ranges for drawing scenarios the way the simulation section does."""

    n_antennas: int = 12
    n_users: int = 5
    n_rf_chains: int = 2
    n_targets: int = 4
    n_sched_targets: int = 2
    phase_bits: int = 2
    tx_dbm: float = 40.0
    noise_dbm: float = -87.0
    sinr_threshold: float = 4.0
    cross_interference_threshold: float = 10.0  # mW
    los_separation_deg: float = 10.0
    los_window_deg: tuple[float, float] = (20.0, 160.0)
    distance_range_m: tuple[float, float] = (20.0, 80.0)
    target_angle_range_deg: tuple[float, float] = (20.0, 160.0)
    reflection_range: tuple[float, float] = (0.04, 0.08)
    channel: ChannelModel = field(default_factory=ChannelModel)

    @classmethod
    def from_dict(cls, tree: Mapping) -> "RandomScenarioParams":
        tree = dict(tree)
        if "channel" in tree:
            tree["channel"] = ChannelModel(**tree["channel"])
        for key in ("los_window_deg", "distance_range_m", "target_angle_range_deg",
                    "reflection_range"):
            if key in tree:
                tree[key] = tuple(float(v) for v in tree[key])
        known = set(cls.__dataclass_fields__)
        unknown = set(tree) - known
        if unknown:
            raise ScenarioError(sorted(unknown)[0], "unknown template field")
        return cls(**tree)


def draw_los_angles(rng: np.random.Generator, count: int, separation: float,
                    window: tuple[float, float]) -> np.ndarray:
    """First angle uniform, the rest at fixed ``separation`` increments, all inside ``window``."""
    lo, hi = window
    span = (count - 1) * separation
    if hi - span < lo:
        raise ScenarioError("los_separation_deg",
                            f"{count} users spaced {separation} deg do not fit in {window}")
    first = rng.uniform(lo, hi - span)
    return first + separation * np.arange(count)


def random_scenario(params: RandomScenarioParams, rng: np.random.Generator | int) -> Scenario:
    rng = np.random.default_rng(rng)
    U, T, N = params.n_users, params.n_targets, params.n_antennas
    betas = draw_los_angles(rng, U, params.los_separation_deg, params.los_window_deg)
    dists = rng.uniform(*params.distance_range_m, size=U)
    shadow = rng.normal(0.0, params.channel.shadowing_std_db, size=U)
    channels = np.stack([sample_channel(b, d, rng, N, params.channel, s)
                         for b, d, s in zip(betas, dists, shadow)])
    angles = rng.uniform(*params.target_angle_range_deg, size=T)
    coeffs = rng.uniform(*params.reflection_range, size=T)
    return Scenario(
        n_antennas=N, n_users=U, n_rf_chains=params.n_rf_chains, n_targets=T,
        n_sched_targets=params.n_sched_targets, channels=channels,
        noise_power=dbm_to_mw(params.noise_dbm), target_angles=angles, target_coeffs=coeffs,
        sinr_thresholds=np.full(U, params.sinr_threshold),
        cross_interference_threshold=params.cross_interference_threshold,
        tx_power=dbm_to_mw(params.tx_dbm), phase_bits=params.phase_bits,
        meta={"los_angles_deg": betas.tolist(), "distances_m": dists.tolist(),
              "shadowing_db": shadow.tolist()},
    )
