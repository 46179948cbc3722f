"""Method-of-steps integrator for the delay differential equation of j_kappa.

j_kappa is the continuous solution of u j'(u) = kappa (j(u) - j(u-1)) with
j(u) = e^(-gamma*kappa) u^kappa / kappa! on (0, 1] and j = 0 for u <= 0.
Integrating segment by segment over [m, m+1], with the delayed value read
from the previous segment's dense output, keeps every right-hand side
smooth (the derivative has kinks only at integers).  This module is a test
oracle for the series machinery, deliberately independent of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import solve_ivp

from .precision import EULER_GAMMA_STR

_GAMMA = float(EULER_GAMMA_STR)


class ToleranceError(RuntimeError):
    """Step control could not meet the requested tolerance."""


@dataclass(frozen=True)
class SegmentSolution:
    """Dense output of one unit segment [m, m+1] of the method of steps."""

    index: int
    t_start: float
    t_end: float
    dense: Callable
    err_estimate: float


class DdeSolution:
    """Piecewise solution: analytic initial segment plus dense-output segments."""

    def __init__(self, kappa: int, tol: float, u_max: float, segments):
        self.kappa = kappa
        self.tol = tol
        self.u_max = u_max
        self.segments = segments
        self._front = math.exp(-_GAMMA * kappa) / math.factorial(kappa)

    def error_estimate(self) -> float:
        """Conservative global error estimate at the end of the solved range.

        A local error injected at u0 can grow with the homogeneous mode of
        the delay equation, at most like (u / u0)^kappa, so each segment's
        local estimate is amplified accordingly before summing.
        """
        return sum(
            seg.err_estimate * (self.u_max / seg.t_start) ** self.kappa
            for seg in self.segments
        )

    def j(self, u: float) -> float:
        if u <= 0.0:
            return 0.0
        if u <= 1.0:
            return self._front * u ** self.kappa
        if u > self.u_max:
            raise ValueError(f"u = {u:.6g} outside solved range (<= {self.u_max:.6g})")
        i = min(int(math.floor(u - 1.0)), len(self.segments) - 1)
        return float(self.segments[i].dense(u)[0])

    def j_prime(self, u: float) -> float:
        if u <= 0.0:
            return 0.0
        if u <= 1.0:
            return self._front * self.kappa * u ** (self.kappa - 1)
        return self.kappa * (self.j(u) - self.j(u - 1.0)) / u


def solve_j(kappa: int, u_max: float, tol: float = 1e-9) -> DdeSolution:
    """Integrate the delay equation for j_kappa on (0, u_max].

    The initial segment (0, 1] is the exact monomial; each later unit
    segment is integrated with DOP853 (dense output of matching order),
    reading the delayed term from the segment one unit back.

    Error control is purely relative (vanishing atol): perturbations of j
    grow like (u / u0)^kappa, so an absolute tolerance applied where j is
    still of size e^(-gamma kappa) u^kappa / kappa! would be amplified by
    many orders of magnitude downstream, while relative errors ride the
    homogeneous mode and stay relative.  j is positive on every integrated
    segment, so relative control is well defined.  The per-segment error
    estimate is the rtol * max|j| proxy; rtol sits well below `tol` to
    absorb the remaining segment-to-segment growth.
    """
    if kappa < 1:
        raise ValueError("kappa must be a positive integer")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    rtol = max(tol * 1e-5, 2.5e-14)
    atol = 1e-30
    front = math.exp(-_GAMMA * kappa) / math.factorial(kappa)
    segments = []

    def delayed(t: float) -> float:
        s = t - 1.0
        if s <= 0.0:
            return 0.0
        if s <= 1.0:
            return front * s ** kappa
        i = min(int(math.floor(s - 1.0)), len(segments) - 1)
        return float(segments[i].dense(s)[0])

    def rhs(t, y):
        return [kappa * (y[0] - delayed(t)) / t]

    y0 = [front]
    m = 1
    while m < u_max:
        t_end = min(m + 1.0, u_max)
        sol = solve_ivp(rhs, (float(m), t_end), y0, method="DOP853",
                        dense_output=True, rtol=rtol, atol=atol)
        if not sol.success:
            raise ToleranceError(
                f"segment [{m}, {t_end}] failed at tol = {tol:g}: {sol.message}"
            )
        segments.append(SegmentSolution(
            index=m,
            t_start=float(m),
            t_end=t_end,
            dense=sol.sol,
            err_estimate=rtol * float(abs(sol.y[0]).max()),
        ))
        y0 = [float(sol.y[0, -1])]
        m += 1
    solution = DdeSolution(kappa, tol, max(u_max, 1.0), segments)
    if solution.error_estimate() > tol:
        raise ToleranceError(
            f"estimated global error {solution.error_estimate():.3g} exceeds "
            f"tol = {tol:g}; the rtol floor cannot certify this tolerance"
        )
    return solution


def solve_j_prime(kappa: int, u: float, solution: DdeSolution) -> float:
    """j_kappa'(u) from a solved DdeSolution (analytic on the initial segment)."""
    if solution.kappa != kappa:
        raise ValueError("solution was computed for a different kappa")
    if u > solution.u_max:
        raise ValueError(f"u = {u:.6g} outside solved range")
    return solution.j_prime(u)
