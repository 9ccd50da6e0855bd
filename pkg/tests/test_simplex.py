import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from isacopt.milp.model import EQ, GE, LE, MilpModel
from isacopt.milp.simplex import INFEASIBLE, OPTIMAL, Tolerances, solve_dense, solve_lp

from lp_cases import CASES


@pytest.mark.parametrize("name,build,status,objective", CASES, ids=[c[0] for c in CASES])
def test_closed_form_optimum(name, build, status, objective):
    model = build()
    sol = solve_lp(model)
    assert sol.status == status
    if status == OPTIMAL:
        assert sol.objective == pytest.approx(objective, abs=1e-9)
        assert model.max_violation(sol.x) <= 1e-8


def _random_lp(rng, m, n):
    A = rng.normal(size=(m, n)).round(2)
    x0 = rng.uniform(0, 1, n)
    senses = rng.choice([LE, GE, EQ], size=m, p=[0.6, 0.3, 0.1])
    b = A @ x0 + np.where(senses == LE, 0.5, np.where(senses == GE, -0.5, 0.0))
    c = rng.normal(size=n)
    return c, A, senses, b, np.zeros(n), np.full(n, 2.0)


def _dual_bound(c, A, senses, b, lb, ub):
    """Independent upper bound: the HiGHS optimum of the same problem."""
    le, ge, eq = senses == LE, senses == GE, senses == EQ
    res = linprog(-c, A_ub=np.vstack([A[le], -A[ge]]), b_ub=np.concatenate([b[le], -b[ge]]),
                  A_eq=A[eq] if eq.any() else None, b_eq=b[eq] if eq.any() else None,
                  bounds=list(zip(lb, ub)), method="highs")
    return res


@given(st.integers(0, 10_000), st.integers(1, 8), st.integers(1, 8))
@settings(max_examples=60, deadline=None)
def test_random_lps_match_reference(seed, m, n):
    rng = np.random.default_rng(seed)
    c, A, senses, b, lb, ub = _random_lp(rng, m, n)
    sol = solve_dense(c, A, senses, b, lb, ub)
    ref = _dual_bound(c, A, senses, b, lb, ub)
    if ref.status == 2:
        assert sol.status == INFEASIBLE
        return
    assert sol.status == OPTIMAL
    # weak duality: our primal value never exceeds the reference optimum
    assert sol.objective <= -ref.fun + 1e-7 * max(1.0, abs(ref.fun))
    assert sol.objective == pytest.approx(-ref.fun, rel=1e-7, abs=1e-7)
    act = A @ sol.x
    assert np.all(act[senses == LE] <= b[senses == LE] + 1e-8)
    assert np.all(act[senses == GE] >= b[senses == GE] - 1e-8)
    assert np.all(np.abs(act[senses == EQ] - b[senses == EQ]) <= 1e-8)
    assert np.all(sol.x >= lb - 1e-9) and np.all(sol.x <= ub + 1e-9)


def test_duals_certify_optimality():
    # max 3x + 4y; x + 2y <= 14; 3x - y >= 0; x - y <= 2
    c = np.array([3.0, 4.0])
    A = np.array([[1.0, 2.0], [3.0, -1.0], [1.0, -1.0]])
    senses = np.array([LE, GE, LE])
    b = np.array([14.0, 0.0, 2.0])
    sol = solve_dense(c, A, senses, b, np.zeros(2), np.full(2, 100.0))
    assert sol.status == OPTIMAL
    y = sol.duals
    # dual objective at an interior-bounded optimum equals the primal objective
    assert y @ b == pytest.approx(sol.objective, abs=1e-9)
    np.testing.assert_allclose(y @ A, c, atol=1e-9)


def test_bland_fallback_terminates_on_cycling_prone_lp():
    # Beale's example (cycles under naive Dantzig pricing without anti-cycling)
    c = np.array([0.75, -150.0, 0.02, -6.0])
    A = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
    senses = np.array([LE, LE, LE])
    b = np.array([0.0, 0.0, 1.0])
    sol = solve_dense(c, A, senses, b, np.zeros(4), np.full(4, 1e6),
                      Tolerances(degenerate_before_bland=2))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(0.05)


def test_iteration_budget_reports_numerical_failure():
    c = np.array([1.0, 1.0])
    A = np.array([[1.0, 1.0]])
    sol = solve_dense(c, A, np.array([GE]), np.array([1.0]), np.zeros(2), np.full(2, 5.0),
                      Tolerances(max_iterations=0))
    assert sol.status not in (OPTIMAL, INFEASIBLE)
