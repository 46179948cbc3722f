"""Method-of-steps oracle: analytic segments, convergence, residuals."""

import math

import numpy as np
import pytest

from siftlim import ToleranceError, solve_j, solve_j_prime
from siftlim.precision import EULER_GAMMA_STR

GAMMA = float(EULER_GAMMA_STR[:20])
E2G = math.exp(-2 * GAMMA)


@pytest.fixture(scope="module")
def sol2(oracle_cache):
    return oracle_cache(2)


def test_initial_segment(sol2):
    assert abs(sol2.j(1.0) - E2G / 2) < 1e-16
    assert abs(sol2.j(0.5) - E2G * 0.25 / 2) < 1e-16
    assert sol2.j(0.0) == 0.0
    assert sol2.j(-3.0) == 0.0


def test_first_step_closed_form(sol2):
    """Integrating (j/t^2)' = -e^(-2g)(t-1)^2/t^3 over [1,2] gives
    j(2) = e^(-2 gamma) (9/2 - 4 log 2); pinned as a regression value."""
    expected = E2G * (4.5 - 4.0 * math.log(2.0))
    assert abs(sol2.j(2.0) - expected) < 1e-10


def test_jprime_initial_segment(sol2):
    assert abs(solve_j_prime(2, 0.5, sol2) - E2G * 0.5) < 1e-15
    assert solve_j_prime(2, -1.0, sol2) == 0.0


def test_jprime_continuous_at_one(sol2):
    left = solve_j_prime(2, 1.0, sol2)
    right = solve_j_prime(2, 1.0 + 1e-12, sol2)
    assert abs(left - E2G) < 1e-14
    assert abs(right - E2G) < 1e-9


def test_self_convergence():
    coarse = solve_j(3, 4.05, tol=1e-6)
    fine = solve_j(3, 4.05, tol=5e-7)
    budget = coarse.error_estimate()
    assert budget <= coarse.tol
    for u in np.arange(0.1, 4.0, 0.173):
        assert abs(coarse.j(u) - fine.j(u)) <= budget


def test_unreachable_tolerance_reported():
    with pytest.raises(ToleranceError):
        solve_j(10, 11.0, tol=1e-13)


def test_monotone_and_range(sol2):
    grid = np.arange(0.05, 3.05, 0.025)
    vals = [sol2.j(u) for u in grid]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert all(-1e-12 <= v <= 1.0 + sol2.tol for v in vals)


def test_residual_at_random_points(oracle_cache):
    """The dense output satisfies the delay equation; j' from finite
    differences of the dense output, so the check is not circular."""
    sol = oracle_cache(4)
    rng = np.random.default_rng(1234)
    h = 1e-6
    for u in rng.uniform(1.01, 4.95, size=1000):
        if min(u - math.floor(u), math.ceil(u) - u) < 2 * h:
            continue
        fd = (sol.j(u + h) - sol.j(u - h)) / (2 * h)
        residual = u * fd - 4 * sol.j(u) + 4 * sol.j(u - 1.0)
        assert abs(residual) <= 10 * sol.tol + 1e-8, u


def test_segments_join(sol2):
    for left, right in zip(sol2.segments[:-1], sol2.segments[1:]):
        t = right.t_start
        assert abs(float(left.dense(t)[0]) - float(right.dense(t)[0])) < 1e-12


def test_matches_series_evaluator(evaluator_cache, oracle_cache):
    ev = evaluator_cache(5)
    sol = oracle_cache(5)
    for u in (0.9, 2.3, 4.7617, 5.9):
        assert abs(ev.eval_j(u).value - sol.j(u)) < 1e-6


def test_validation(sol2):
    with pytest.raises(ValueError):
        solve_j(0, 3.0)
    with pytest.raises(ValueError):
        solve_j(2, 3.0, tol=0.0)
    with pytest.raises(ValueError):
        sol2.j(50.0)
    with pytest.raises(ValueError):
        solve_j_prime(3, 1.5, sol2)
    with pytest.raises(ValueError):
        solve_j_prime(2, 500.0, sol2)


def test_tolerance_error(monkeypatch):
    import siftlim.dde_oracle as mod

    class _Failed:
        success = False
        message = "stub failure"

    monkeypatch.setattr(mod, "solve_ivp", lambda *a, **k: _Failed())
    with pytest.raises(ToleranceError):
        solve_j(2, 3.0)
