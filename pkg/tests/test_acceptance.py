"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  All tolerances are fixed here, not calibrated elsewhere.
"""

import math
import time

import numpy as np
import pytest
from gmpy2 import mpfr

from siftlim import (
    DHR_BETA,
    PUBLISHED_POINTS,
    REFERENCE_BETA,
    CoefficientTable,
    QuadratureRule,
    SieveEvaluator,
    compute_quadratic,
    eval_k,
    find_beta,
    solve_j,
    truncation_bound,
)
from siftlim.kernel_series import SUMMATION
from siftlim.precision import working_context

KAPPAS = tuple(range(2, 11))
EPS130 = 2.0 ** (1 - 130)


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {num} ({name}): {status}  {detail}")


@pytest.fixture(scope="module")
def published_run():
    """Fresh, timed reproduction of the benchmark table at N = 80."""
    start = time.perf_counter()
    rows = {}
    for kappa in KAPPAS:
        evaluator = SieveEvaluator.build(kappa)
        u, a, _, _ = PUBLISHED_POINTS[kappa]
        rule = QuadratureRule.for_evaluation(evaluator, u)
        quadratic = compute_quadratic(kappa, u, rule, evaluator)
        rows[kappa] = (evaluator, quadratic)
    elapsed = time.perf_counter() - start
    return rows, elapsed


@pytest.fixture(scope="module")
def beta_results(published_run):
    rows, _ = published_run
    return {kappa: find_beta(kappa, evaluator=rows[kappa][0]) for kappa in KAPPAS}


def test_criterion_1_table_reproduction(published_run):
    """Benchmark main terms at the published (u, a), N = 80, under 60 s."""
    rows, elapsed = published_run
    ok = elapsed < 60.0
    worst = ""
    for kappa in KAPPAS:
        u, a, expected, _ = PUBLISHED_POINTS[kappa]
        got = rows[kappa][1].value_at(a)
        tol = max(0.1 * abs(expected), 2e-6)
        if not (got > 0.0 and abs(got - expected) <= tol):
            ok = False
            worst += f" kappa={kappa}:{got:.3g}!~{expected:.3g}"
    _report(1, "benchmark table reproduction", ok,
            f"elapsed {elapsed:.1f}s{worst}")
    assert ok
    for kappa in KAPPAS:
        u, a, expected, _ = PUBLISHED_POINTS[kappa]
        got = rows[kappa][1].value_at(a)
        assert got > 0.0
        assert abs(got - expected) <= max(0.1 * abs(expected), 2e-6)
    assert elapsed < 60.0


def test_criterion_2_sifting_limits(beta_results):
    """find_beta reproduces every reference beta within 0.005, beta = 2u+1 exactly."""
    ok = True
    worst = 0.0
    for kappa in KAPPAS:
        res = beta_results[kappa]
        gap = abs(res.beta - REFERENCE_BETA[kappa])
        worst = max(worst, gap)
        if gap > 0.005 or res.beta != 2.0 * res.u + 1.0:
            ok = False
    _report(2, "sifting limits", ok, f"worst |beta - ref| = {worst:.2g}")
    for kappa in KAPPAS:
        res = beta_results[kappa]
        assert abs(res.beta - REFERENCE_BETA[kappa]) <= 0.005, kappa
        assert res.beta == 2.0 * res.u + 1.0, kappa
    assert ok


def test_criterion_3_error_column(published_run):
    """Propagated truncation bounds within a factor 100 of the benchmark column."""
    rows, _ = published_run
    ok = True
    worst_ratio = 1.0
    for kappa in KAPPAS:
        _, a, _, expected_err = PUBLISHED_POINTS[kappa]
        got = rows[kappa][1].err_at(a)
        ratio = got / expected_err
        worst_ratio = max(worst_ratio, ratio, 1.0 / ratio)
        if not (1.0 / 100.0 <= ratio <= 100.0):
            ok = False
    _report(3, "error column magnitude", ok, f"worst factor {worst_ratio:.2f}")
    for kappa in KAPPAS:
        _, a, _, expected_err = PUBLISHED_POINTS[kappa]
        ratio = rows[kappa][1].err_at(a) / expected_err
        assert 1.0 / 100.0 <= ratio <= 100.0, kappa
    assert ok


def test_criterion_4_oracle_equivalence(published_run):
    """Series j agrees with the delay-equation oracle to 1e-6 on 0.01 grids,
    and the series pair satisfies the delay equation within 10x its bounds."""
    rows, _ = published_run
    worst_gap = 0.0
    worst_resid_margin = 0.0
    ok = True
    for kappa in KAPPAS:
        evaluator = rows[kappa][0]
        oracle = solve_j(kappa, kappa + 1.05, tol=1e-9)
        for i in range(1, 100 * (kappa + 1) + 1):
            u = round(0.01 * i, 2)
            gap = abs(evaluator.eval_j(u).value - oracle.j(u))
            worst_gap = max(worst_gap, gap)
            if gap > 1e-6:
                ok = False
            if u <= 1.0 or min(u - math.floor(u), math.ceil(u) - u) < 1e-3:
                continue
            jp = evaluator.eval_j_prime(u)
            ju = evaluator.eval_j(u)
            ju1 = evaluator.eval_j(u - 1.0)
            with working_context():
                resid = abs(float(
                    mpfr(u) * jp.value_hp - kappa * ju.value_hp + kappa * ju1.value_hp
                ))
            allowance = 10.0 * (u * jp.bound + kappa * ju.bound + kappa * ju1.bound)
            worst_resid_margin = max(worst_resid_margin, resid / allowance)
            if resid > allowance:
                ok = False
    _report(4, "oracle equivalence and residual", ok,
            f"worst |j - oracle| = {worst_gap:.2g}, worst residual/allowance = "
            f"{worst_resid_margin:.2g}")
    assert ok
    assert worst_gap <= 1e-6
    assert worst_resid_margin <= 1.0


def test_criterion_5_coefficient_bounds(published_run):
    """Stored lam = 0 rows obey |b_j| <= 4/(1+c_nu)^j plus chained slack, and
    the two recursion forms agree to 1e3 units of rounding for n <= 6."""
    table = published_run[0][10][0].table
    params = table.params
    ok = True
    worst_excess = 0.0
    with working_context():
        pow2N = mpfr(2) ** params.N
        for nu in range(params.nu_max + 1):
            slack = float(table.budget.m0[nu - 1] / pow2N) if nu >= 1 else 0.0
            base = 1.0 + params.radii_f[nu]
            for n in range(table.n_max + 1):
                row = table.row(0, n, nu)
                for j in range(2, params.N + 1):
                    limit = 4.0 / base ** j + slack + 1e-30
                    excess = abs(float(row[j])) / limit
                    worst_excess = max(worst_excess, excess)
                    if excess > 1.0:
                        ok = False
    two = CoefficientTable.build(1, n_max=6, lam_max=0)
    summ = CoefficientTable.build(1, n_max=6, lam_max=0, recursion=SUMMATION)
    worst_ulps = 0.0
    for nu in range(3):
        for n in range(7):
            ra, rb = two.row(0, n, nu), summ.row(0, n, nu)
            for j in range(41):
                x, y = float(ra[j]), float(rb[j])
                scale = max(abs(x), abs(y))
                if scale == 0.0:
                    continue
                ulps = abs(float(ra[j] - rb[j])) / (EPS130 * scale)
                worst_ulps = max(worst_ulps, ulps)
                if ulps > 1e3:
                    ok = False
    _report(5, "coefficient bound suite", ok,
            f"worst bound usage {worst_excess:.3f}, recursion gap {worst_ulps:.1f} ulps")
    assert ok
    assert worst_excess <= 1.0
    assert worst_ulps <= 1e3


def test_criterion_6_derivative_identity(published_run):
    """d/du K_n(u, lam) = lam K_n(u, lam-1) via centered differences at 500
    random in-circle points."""
    table = published_run[0][10][0].table
    params = table.params
    budget = table.budget
    h = 1e-5
    rng = np.random.default_rng(20260810)
    checked = 0
    ok = True
    worst = 0.0
    while checked < 500:
        n = int(rng.integers(0, table.n_max + 1))
        lam = int(rng.integers(1, table.lam_max + 1))
        nu = int(rng.integers(0, params.nu_max + 1))
        lo = params.radii_f[nu] + 2 * h + 1e-3
        hi = params.radii_f[nu + 1] - 2 * h - 1e-3
        if hi <= lo:
            continue
        u = n + rng.uniform(lo, hi)
        with working_context():
            hm = mpfr(h)
            fd = float((eval_k(table, n, lam, mpfr(u) + hm).value
                        - eval_k(table, n, lam, mpfr(u) - hm).value) / (2 * hm))
            target = lam * float(eval_k(table, n, lam - 1, u).value)
        b3 = _third_derivative_scale(table, n, lam, u + h)
        tol = 10.0 * (h * h * b3
                      + truncation_bound(budget, nu, lam) / h
                      + lam * truncation_bound(budget, nu, lam - 1))
        rel = abs(fd - target) / tol
        worst = max(worst, rel)
        if rel > 1.0:
            ok = False
        checked += 1
    _report(6, "derivative identity", ok,
            f"500 points, worst error/tolerance = {worst:.3g}")
    assert ok
    assert worst <= 1.0


def _third_derivative_scale(table, n, lam, u):
    params = table.params
    nu = params.circle_index(u - n)
    x = u - (n + params.radii_f[nu])
    row = table.row(lam, n, nu)
    total = 0.0
    for j in range(3, len(row)):
        total += j * (j - 1) * (j - 2) * abs(float(row[j])) * x ** (j - 3)
    return total


def test_criterion_7_monotonicity_and_range(published_run):
    """j_kappa nondecreasing and inside [0, 1] up to reported bounds."""
    rows, _ = published_run
    ok = True
    worst = ""
    for kappa in KAPPAS:
        evaluator = rows[kappa][0]
        prev = evaluator.eval_j(0.01)
        for i in range(2, 100 * (kappa + 1) + 1):
            u = round(0.01 * i, 2)
            cur = evaluator.eval_j(u)
            slack = 10.0 * (cur.bound + prev.bound) + 1e-25
            if cur.value < prev.value - slack:
                ok = False
                worst += f" kappa={kappa}@u={u}"
            if not (-cur.bound - 1e-25 <= cur.value <= 1.0 + cur.bound + 1e-25):
                ok = False
                worst += f" range kappa={kappa}@u={u}"
            prev = cur
    _report(7, "monotonicity and range", ok, worst or "all grids clean")
    assert ok


def test_criterion_8_truncation_robustness(published_run):
    """Benchmark main terms move by less than the N = 60 budget when N drops."""
    rows, _ = published_run
    ok = True
    worst = 0.0
    for kappa in KAPPAS:
        u, a, _, _ = PUBLISHED_POINTS[kappa]
        ev60 = SieveEvaluator.build(kappa, N=60)
        rule = QuadratureRule.for_evaluation(ev60, u)
        q60 = compute_quadratic(kappa, u, rule, ev60)
        with working_context():
            delta = abs(float(q60.value_at_hp(a) - rows[kappa][1].value_at_hp(a)))
        budget = q60.err_at(a)
        worst = max(worst, delta / budget)
        if delta >= budget:
            ok = False
    _report(8, "truncation robustness (N = 60)", ok,
            f"worst |delta| / budget = {worst:.2g}")
    assert ok
    assert worst < 1.0


def test_criterion_9_trends(published_run, beta_results):
    """Optimized shifts decrease toward 1/4; the gap of beta - 2 kappa to 19/36
    shrinks; the computed limits beat the DHR baseline for kappa >= 3 only."""
    rows, _ = published_run
    from siftlim import optimal_a

    shifts = [optimal_a(rows[kappa][1]).a for kappa in KAPPAS]
    ok = all(0.25 < a < 0.27 for a in shifts)
    ok = ok and all(b < a for a, b in zip(shifts, shifts[1:]))

    gaps = [abs(beta_results[kappa].beta - 2 * kappa - 19.0 / 36.0) for kappa in KAPPAS]
    ok = ok and all(b <= a + 2e-3 for a, b in zip(gaps, gaps[1:]))
    ok = ok and gaps[-1] < gaps[0]

    dhr_ok = all(beta_results[kappa].beta < DHR_BETA[kappa] for kappa in KAPPAS if kappa >= 3)
    dhr_ok = dhr_ok and beta_results[2].beta > DHR_BETA[2]
    ok = ok and dhr_ok
    _report(9, "trend checks", ok,
            f"a* from {shifts[0]:.6f} down to {shifts[-1]:.6f}; "
            f"gap(19/36) from {gaps[0]:.4f} down to {gaps[-1]:.4f}")
    assert all(0.25 < a < 0.27 for a in shifts)
    assert all(b < a for a, b in zip(shifts, shifts[1:]))
    assert all(b <= a + 2e-3 for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < gaps[0]
    assert dhr_ok
    assert ok
