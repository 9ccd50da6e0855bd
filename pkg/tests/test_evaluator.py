import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isacopt.allocation import Allocation
from isacopt.evaluator import beampattern, cross_power, dpg, sinr, verify
from isacopt.scenario import steering_vector

from conftest import make_scenario, prepared


def _alloc(beams, users, pairing, tau=0.0):
    return Allocation(tuple(users), tuple(sorted(pairing)), dict(pairing),
                      np.asarray(beams, dtype=complex), tau)


def test_single_user_sinr_is_snr():
    sc = make_scenario(N=1, U=1, K=1, h=[[2.0]], P=1.0)
    ns, _ = prepared(sc)
    assert sinr(ns, _alloc([[1.0]], [0], {0: 0}), 0) == pytest.approx(4.0)


def test_symmetric_interference():
    sc = make_scenario(N=1, U=2, K=2, T=1, J=1, h=[[1.5], [1.5]])
    ns, _ = prepared(sc)
    g2 = 1.5 ** 2
    a = _alloc([[1.0], [1.0]], [0, 1], {0: 0})
    assert sinr(ns, a, 0) == pytest.approx(g2 / (g2 + 1))


def test_unscheduled_user_has_zero_sinr():
    sc = make_scenario(N=2, U=2)
    ns, _ = prepared(sc)
    assert sinr(ns, _alloc([[1, 1], [0, 0]], [0], {0: 0}), 1) == 0.0


@given(st.integers(0, 10_000))
def test_sinr_trace_identity(seed):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=4) + 1j * rng.normal(size=4)
    w = rng.normal(size=4) + 1j * rng.normal(size=4)
    lhs = abs(np.vdot(h, w)) ** 2
    rhs = np.trace(np.outer(h, h.conj()) @ np.outer(w, w.conj())).real
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_dpg_of_matched_beam():
    sc = make_scenario(N=4, U=1, K=1, T=1, J=1, angles=[60.0], alpha=[0.3], P=1.0)
    ns, _ = prepared(sc)
    d = 0.5
    a = _alloc([d * steering_vector(60.0, 4)], [0], {0: 0})
    assert dpg(ns, a, 0) == pytest.approx(0.3 * d ** 2 * 16)


def test_dpg_and_cross_power_match_inner_products():
    rng = np.random.default_rng(3)
    sc = make_scenario(N=5, U=2, K=2, T=2, J=2, angles=[30.0, 120.0], alpha=[0.4, 0.9])
    ns, _ = prepared(sc)
    w = rng.normal(size=(2, 5)) + 1j * rng.normal(size=(2, 5))
    a = _alloc(w, [0, 1], {0: 1, 1: 0})
    a0, a1 = steering_vector(30.0, 5), steering_vector(120.0, 5)
    assert dpg(ns, a, 0) == pytest.approx(0.4 * abs(np.vdot(a0, w[1])) ** 2)
    assert cross_power(ns, a, 0, 1) == pytest.approx(0.9 * abs(np.vdot(a1, w[1])) ** 2)
    with pytest.raises(ValueError):
        cross_power(ns, a, 0, 0)


def test_unpaired_target_sees_nothing():
    sc = make_scenario(N=3, U=1, K=1, T=2, J=1)
    ns, _ = prepared(sc)
    a = _alloc([[1, 1, 1]], [0], {0: 0})
    assert dpg(ns, a, 1) == 0.0
    assert cross_power(ns, a, 1, 0) == 0.0


def test_beampattern_peak_and_zero():
    d, th = 0.7, 75.0
    grid = np.arange(0.25, 180, 0.25)
    g = beampattern(d * steering_vector(th, 6), grid)
    assert grid[np.argmax(g)] == pytest.approx(th)
    assert g.max() == pytest.approx(d ** 2 * 36)
    assert np.all(beampattern(np.zeros(6), grid) == 0)


def test_beampattern_mean_over_uniform_cosine_is_beam_power():
    rng = np.random.default_rng(0)
    w = rng.normal(size=6) + 1j * rng.normal(size=6)
    u = np.linspace(-1, 1, 20001)[1:-1]
    theta = np.rad2deg(np.arccos(u))
    # entries of a(theta) are orthogonal over cos(theta) in (-1, 1): mean |a^H w|^2 -> ||w||^2
    assert beampattern(w, theta).mean() == pytest.approx(np.linalg.norm(w) ** 2, rel=1e-3)


def test_verify_flags_non_codebook_entry_and_bad_pairing():
    sc = make_scenario(N=2, U=2, K=1, T=1, J=1, Q=1, gamma=1e-3)
    ns, cb = prepared(sc)
    d = cb.magnitude
    good = _alloc([[d, d], [0, 0]], [0], {0: 0}, tau=dpg(ns, _alloc([[d, d], [0, 0]], [0], {0: 0}), 0))
    assert verify(ns, good, cb).ok
    off = _alloc([[d, 1j * d * 0.5], [0, 0]], [0], {0: 0}, tau=0.0)
    assert any(c.name.startswith("C12") for c in verify(ns, off, cb).failures())
    wrong = _alloc([[d, d], [0, 0]], [0], {0: 1}, tau=0.0)
    assert any(c.name.startswith("C7") for c in verify(ns, wrong, cb).failures())


def test_lemma_trace_product_bound():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        Y = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A, B = X @ X.conj().T, Y @ Y.conj().T
        assert np.trace(A @ B).real <= np.trace(A).real * np.trace(B).real * (1 + 1e-12)


def test_lemma_binary_product_truth_table():
    for a in (0, 1):
        for b in (0, 1):
            feasible = [c for c in (0, 1) if c <= a and c <= b and c >= a + b - 1]
            assert feasible == [a * b]
