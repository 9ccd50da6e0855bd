import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isacopt.baselines import (BaselineError, FixedAssignment, alignment_weight, bl1_assignment,
                               bl2_assignment, bl4_assignment, channel_correlation,
                               correlation_matrix, least_correlated_users, max_weight_matching,
                               run_baseline)
from isacopt.evaluator import verify
from isacopt.scenario import steering_vector
from isacopt.solve import SolverConfig, solve_allocation

from conftest import make_scenario, prepared

EXACT = SolverConfig(rel_gap=1e-9)


def test_alignment_extremes():
    a = steering_vector(70.0, 4)
    assert alignment_weight(a, 70.0) == pytest.approx(1.0)
    # a(90) = ones; a vector orthogonal to it
    assert alignment_weight(np.array([1, -1, 1, -1]), 90.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(BaselineError):
        alignment_weight(np.zeros(4), 90.0)


@given(st.integers(0, 10_000), st.floats(1.0, 179.0))
def test_alignment_matches_explicit_inner_product(seed, theta):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=5) + 1j * rng.normal(size=5)
    a = steering_vector(theta, 5)
    explicit = abs(sum(np.conj(h[i]) * a[i] for i in range(5))) / (
        np.sqrt(sum(abs(z) ** 2 for z in h)) * np.sqrt(5))
    w = alignment_weight(h, theta)
    assert 0.0 <= w <= 1.0
    assert w == pytest.approx(explicit, rel=1e-12)


def test_correlation_cases():
    h = np.array([1.0, 1j, 2.0])
    assert channel_correlation(h, h) == pytest.approx(1.0)
    assert channel_correlation(np.array([1, 0]), np.array([0, 1])) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        assert channel_correlation(a, b) == pytest.approx(channel_correlation(b, a))


def test_matching_small_cases():
    assert max_weight_matching([[0.7]], 1) == {0: 0}
    assert max_weight_matching([[1, 0], [0, 1]], 2) == {0: 0, 1: 1}
    with pytest.raises(BaselineError):
        max_weight_matching([[1, -1]], 1)
    with pytest.raises(BaselineError):
        max_weight_matching([[1, 1]], 2)


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_matching_equals_enumeration(seed, J):
    W = np.random.default_rng(seed).uniform(0, 1, (4, 4))
    got = max_weight_matching(W, J)
    assert len(got) == J and len(set(got.values())) == J
    best = max(sum(W[u, t] for t, u in zip(ts, us))
               for ts in itertools.combinations(range(4), J)
               for us in itertools.permutations(range(4), J))
    assert sum(W[u, t] for t, u in got.items()) == pytest.approx(best)


def test_bl2_picks_the_orthogonal_pair():
    h = np.array([[1, 0], [1, 0], [0, 1]], dtype=complex)
    sc = make_scenario(N=2, U=3, K=2, T=1, J=1, h=h)
    fa = bl2_assignment(prepared(sc)[0])
    assert fa.scheduled_users in ((0, 2), (1, 2))


@given(st.integers(0, 10_000), st.sampled_from(["max", "sum"]))
@settings(max_examples=25)
def test_bl2_subset_is_optimal_for_its_criterion(seed, agg):
    rng = np.random.default_rng(seed)
    H = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
    C = correlation_matrix(H)
    chosen = least_correlated_users(C, 3, agg)

    def score(s):
        vals = [C[a, b] for a, b in itertools.combinations(s, 2)]
        return max(vals) if agg == "max" else sum(vals)
    assert score(chosen) == pytest.approx(min(score(s) for s in itertools.combinations(range(6), 3)))


def test_bl1_structure():
    sc = make_scenario(N=4, U=4, K=3, T=3, J=2, angles=[30.0, 90.0, 150.0])
    fa = bl1_assignment(prepared(sc)[0])
    fa.validate(4, 3, 3, 2)
    assert len(fa.pairing) == 2


def test_fixed_assignment_validation():
    with pytest.raises(BaselineError):
        FixedAssignment((0, 0)).validate(3, 2, 2, 1)
    with pytest.raises(BaselineError):
        FixedAssignment((0, 1), (0,), {0: 2}).validate(3, 2, 2, 1)


def test_bl4_reproducible_with_seed():
    sc = make_scenario(N=2, U=3, K=2, T=2, J=2, gamma=0.2, xi=1e3)
    ns, cb = prepared(sc)
    a = run_baseline("BL4", ns, cb, np.random.default_rng(42), EXACT)
    b = run_baseline("BL4", ns, cb, np.random.default_rng(42), EXACT)
    assert a.report.status == b.report.status and a.report.objective == b.report.objective
    assert bl4_assignment(ns, np.random.default_rng(7)) == bl4_assignment(ns, np.random.default_rng(7))


def test_baselines_never_beat_the_joint_optimum():
    rng = np.random.default_rng(6)
    for _ in range(6):
        sc = make_scenario(N=2, U=3, K=2, T=2, J=2, Q=1, gamma=float(rng.uniform(0.2, 1.0)),
                           xi=float(rng.uniform(1, 8)), seed=int(rng.integers(1 << 30)))
        ns, cb = prepared(sc)
        opt = solve_allocation(ns, cb, EXACT)
        for kind in ("BL1", "BL2", "BL3", "BL4"):
            out = run_baseline(kind, ns, cb, np.random.default_rng(1), EXACT)
            if out.allocation is None:
                continue
            assert verify(ns, out.allocation, cb).ok
            assert opt.allocation is not None
            assert out.report.objective <= opt.report.objective * (1 + 1e-9) + 1e-12


def test_bl3_keeps_pairing_free():
    sc = make_scenario(N=2, U=3, K=2, T=2, J=1, gamma=0.2)
    ns, cb = prepared(sc)
    out = run_baseline("BL3", ns, cb, np.random.default_rng(0), EXACT)
    users = out.allocation.scheduled_users
    restricted = solve_allocation(ns, cb, EXACT, fixed={"mu": {u: float(u in users) for u in range(3)}})
    assert out.report.objective == pytest.approx(restricted.report.objective)


def test_unknown_kind():
    ns, cb = prepared(make_scenario())
    with pytest.raises(BaselineError):
        run_baseline("BL9", ns, cb)
    with pytest.raises(BaselineError):
        run_baseline("BL3", ns, cb, rng=None)
