import numpy as np
import pytest

from isacopt.codebook import codebook_for
from isacopt.scenario import RandomScenarioParams, Scenario, normalize
from isacopt.tiny import tiny_scenario

DESK = RandomScenarioParams(n_antennas=4, n_users=4, n_rf_chains=2, n_targets=3, n_sched_targets=2)


def make_scenario(N=2, U=2, K=1, T=1, J=1, Q=1, h=None, angles=None, alpha=None,
                  gamma=1.0, xi=1e3, P=4.0, noise=1.0, seed=0):
    rng = np.random.default_rng(seed)
    if h is None:
        h = (rng.normal(size=(U, N)) + 1j * rng.normal(size=(U, N))) / np.sqrt(2)
    if angles is None:
        angles = np.linspace(40, 140, T)
    if alpha is None:
        alpha = np.ones(T)
    return Scenario(N, U, K, T, J, np.asarray(h, dtype=complex), noise, angles, alpha,
                    np.full(U, gamma), xi, P, Q)


@pytest.fixture
def tiny_instances():
    rng = np.random.default_rng(123)
    return [tiny_scenario(rng, antennas=(2, 3), bits=(1,)) for _ in range(6)]


def prepared(sc):
    return normalize(sc), codebook_for(sc)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
