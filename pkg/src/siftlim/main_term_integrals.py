"""Main-term integrals of the lower-bound sieve for linear weights P(w) = w + a.

The certificate quantity is I = I1 - kappa(I2 + I3 + I4) with

    I1 = int_0^u P(w)^2 j'(u-w) dw,
    I2 = int_1^u int_0^1 (P(w)-P(w-t))^2 dt/t  j'(u-w) dw,
    I3 = int_0^1 int_0^w (P(w)-P(w-t))^2 dt/t  j'(u-w) dw,
    I4 = int_0^1 int_w^1 P(w)^2 dt/t           j'(u-w) dw.

For linear P the inner t-integrals collapse (to 1/2, w^2/2 and -log w), and
every outer integrand is quadratic in the shift a, so a single quadrature
pass yields I(a) = A a^2 + B a + C exactly as a quadratic form.  Panels are
split at every point where the truncated j' changes analytic piece (kernel
supports and circle junctions), making each panel integrand a polynomial
that Gauss-Legendre nodes resolve to far below the truncation budgets; the
integrable -log w endpoint of I4 gets a dedicated substitution rule.

The propagated truncation bound is assembled panelwise: the pointwise j'
bound is constant on each panel, so multiplying it by the exact integral of
the absolute weight over the panel gives a rigorous, and empirically tight,
bound on |I~ - I|, again as a quadratic in a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .sieve_function import SieveEvaluator
from .precision import working_context

#: Truncation point of the s = -log w substitution; the discarded tail is
#: below (1+a)^2 * 61 * e^-60 ~ 5e-24 times the integrand scale.
LOG_SUBSTITUTION_CUTOFF = 60.0


class QuadratureConvergenceError(RuntimeError):
    """A panel integral failed its refinement check."""


@dataclass(frozen=True)
class LinearWeight:
    """The sieve weight polynomial P(w) = w + a.

    The shift is restricted to (0, 1): positivity of P on [0, u] keeps the
    weight-ratio bound finite, and the useful optima all lie near 1/4.
    """

    a: float

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError(f"shift a = {self.a} outside (0, 1)")

    def __call__(self, w: float) -> float:
        return w + self.a

    @property
    def coefficients(self) -> tuple:
        return (Fraction(self.a), Fraction(1))


# ---------------------------------------------------------------------------
# Inner t-integrals, exact in rational arithmetic.

def _difference_quotient(p_coeffs: Sequence[Fraction]):
    """Coefficients q[i][j] of Q(w, t) = (P(w) - P(w-t)) / t over w^i t^j.

    The constant term of P cancels in the difference, so the division by t
    is exact; Q is a polynomial whenever P is.
    """
    deg = len(p_coeffs) - 1
    diff = [[Fraction(0)] * (deg + 1) for _ in range(deg + 1)]  # [w power][t power]
    for k, pk in enumerate(p_coeffs):
        if pk == 0:
            continue
        # w^k - (w - t)^k = -sum_{m<k} C(k,m) w^m (-t)^(k-m)
        for m in range(k):
            diff[m][k - m] += -pk * math.comb(k, m) * (-1) ** (k - m)
    q = [[Fraction(0)] * (deg + 1) for _ in range(deg + 1)]
    for i in range(deg + 1):
        for j in range(1, deg + 1):
            q[i][j - 1] = diff[i][j]
    return q


def _square_2var(q):
    n = len(q)
    out = [[Fraction(0)] * (2 * n - 1) for _ in range(2 * n - 1)]
    for i1 in range(n):
        for j1 in range(n):
            if q[i1][j1] == 0:
                continue
            for i2 in range(n):
                for j2 in range(n):
                    if q[i2][j2] == 0:
                        continue
                    out[i1 + i2][j1 + j2] += q[i1][j1] * q[i2][j2]
    return out


def inner_t_integral_unit(p_coeffs: Sequence[Fraction]) -> tuple:
    """int_0^1 t Q(w,t)^2 dt as a polynomial in w (ascending coefficients)."""
    sq = _square_2var(_difference_quotient(p_coeffs))
    out = [Fraction(0)] * len(sq)
    for i, row in enumerate(sq):
        for j, cij in enumerate(row):
            if cij != 0:
                out[i] += cij / (j + 2)  # int_0^1 t^(j+1) dt
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


def inner_t_integral_to_w(p_coeffs: Sequence[Fraction]) -> tuple:
    """int_0^w t Q(w,t)^2 dt as a polynomial in w (ascending coefficients)."""
    sq = _square_2var(_difference_quotient(p_coeffs))
    out = [Fraction(0)] * (2 * len(sq))
    for i, row in enumerate(sq):
        for j, cij in enumerate(row):
            if cij != 0:
                out[i + j + 2] += cij / (j + 2)  # int_0^w t^(j+1) dt
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class InnerReductions:
    """Analytically reduced inner integrals for a weight polynomial.

    `i2_inner` and `i3_inner` are polynomials in w (Fraction coefficients,
    ascending); the I4 inner integral is -log w times P(w)^2, flagged by
    `i4_log_weight` and handled by the quadrature layer.
    """

    i2_inner: tuple
    i3_inner: tuple
    i4_log_weight: bool = True


def inner_reductions(weight: LinearWeight) -> InnerReductions:
    """Reduce the inner t-integrals of I2 and I3 for a linear weight.

    Uses the general divided-difference path, which for P(w) = w + a
    collapses to int_0^1 t dt = 1/2 and int_0^w t dt = w^2 / 2.
    """
    p = weight.coefficients
    return InnerReductions(
        i2_inner=inner_t_integral_unit(p),
        i3_inner=inner_t_integral_to_w(p),
    )


# ---------------------------------------------------------------------------
# Panel quadrature.

@dataclass(frozen=True)
class QuadratureRule:
    """Panelization of [0, u] in w = u - v together with node settings.

    Breakpoints include every w where j~'(u - w) changes analytic piece
    (kernel supports u - n and circle junctions u - (n + c_nu)), plus w = 1
    where the I2/I3/I4 ranges meet; each integrand is analytic on every
    open panel.
    """

    u: float
    breakpoints: tuple
    nodes_per_panel: int = 40
    log_panel: bool = True

    def __post_init__(self):
        if list(self.breakpoints) != sorted(self.breakpoints):
            raise ValueError("breakpoints must be sorted")
        if self.breakpoints[0] != 0.0 or self.breakpoints[-1] != self.u:
            raise ValueError("breakpoints must span [0, u]")
        if self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be at least 2")

    @classmethod
    def for_evaluation(
        cls,
        evaluator: SieveEvaluator,
        u: float,
        nodes_per_panel: int = 40,
        log_panel: bool = True,
    ) -> "QuadratureRule":
        table = evaluator.table
        params = table.params
        points = {0.0, float(u)}
        if u > 1.0:
            points.add(u - 1.0)
            points.add(1.0)
        for n in range(table.n_max + 1):
            for nu in range(params.nu_max + 2):
                w = u - (n + params.radii_f[nu])
                if 0.0 < w < u:
                    points.add(w)
        return cls(
            u=float(u),
            breakpoints=tuple(sorted(points)),
            nodes_per_panel=nodes_per_panel,
            log_panel=log_panel,
        )

    def panels(self):
        bp = self.breakpoints
        return tuple(zip(bp[:-1], bp[1:]))

    def gauss_nodes(self):
        return np.polynomial.legendre.leggauss(self.nodes_per_panel)


class LogPanelResult(NamedTuple):
    value: float
    accuracy: float


def _log_sub_edges(w_top: float) -> list:
    s0 = -math.log(w_top)
    if s0 >= LOG_SUBSTITUTION_CUTOFF - 2.0:
        raise ValueError("log panel start too close to the substitution cutoff")
    edges = [s0, s0 + 2.0, s0 + 6.0, s0 + 14.0, s0 + 30.0, LOG_SUBSTITUTION_CUTOFF]
    return [e for e in edges if e <= LOG_SUBSTITUTION_CUTOFF]


def _log_weighted_quad(f: Callable, w_top: float, order: int) -> mpfr:
    """int_0^{w_top} f(w) (-log w) dw via w = e^-s on geometric s-panels."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = _log_sub_edges(w_top)
    total = mpfr(0)
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        for x, wgt in zip(nodes, weights):
            s = mpfr(mid + half * float(x))
            w = gmpy2.exp(-s)
            total += mpfr(wgt * half) * s * w * mpfr(f(w))
    return total


def log_endpoint_panel(rule: QuadratureRule, f: Callable, w_top: float) -> LogPanelResult:
    """Integrate f(w) * (-log w) over the panel [0, w_top] abutting w = 0.

    Uses the substitution w = e^-s truncated at s = 60, with Gauss-Legendre
    on geometrically growing s-panels; the returned accuracy estimate is the
    change under raising the node order by 8.
    """
    if not 0.0 < w_top <= 1.0:
        raise ValueError("log panel requires 0 < w_top <= 1")
    with working_context():
        coarse = _log_weighted_quad(f, w_top, rule.nodes_per_panel)
        fine = _log_weighted_quad(f, w_top, rule.nodes_per_panel + 8)
    return LogPanelResult(float(fine), abs(float(fine - coarse)))


def _log_moment(w: float, k: int) -> float:
    """int_0^w x^k (-log x) dx, exact closed form."""
    if w <= 0.0:
        return 0.0
    return w ** (k + 1) * (-math.log(w)) / (k + 1) + w ** (k + 1) / (k + 1) ** 2


@dataclass(frozen=True)
class MainTermQuadratic:
    """I~(a) = A a^2 + B a + C at fixed (kappa, u), with propagated bounds.

    `err` bounds |I~(a) - I(a)| uniformly over a in (0, 1); `err_at` gives
    the sharper bound at a specific shift.  High-precision copies of the
    coefficients back the small-difference comparisons between truncation
    orders.
    """

    kappa: int
    u: float
    A: float
    B: float
    C: float
    err_coeffs: tuple
    t_moments: tuple = field(repr=False, default=(0.0, 0.0, 0.0))
    i2: float = field(repr=False, default=0.0)
    i3: float = field(repr=False, default=0.0)
    log_moments: tuple = field(repr=False, default=(0.0, 0.0, 0.0))
    hp: tuple = field(repr=False, compare=False, default=None)

    @property
    def err(self) -> float:
        eA, eB, eC = self.err_coeffs
        return eA + eB + eC

    def err_at(self, a: float) -> float:
        eA, eB, eC = self.err_coeffs
        return eA * a * a + eB * a + eC

    def value_at(self, a: float) -> float:
        return (self.A * a + self.B) * a + self.C

    def value_at_hp(self, a: float) -> mpfr:
        Ah, Bh, Ch = self.hp
        return (Ah * mpfr(a) + Bh) * mpfr(a) + Ch


def compute_quadratic(
    kappa: int,
    u: float,
    rule: QuadratureRule,
    evaluator: SieveEvaluator,
) -> MainTermQuadratic:
    """Panelwise Gauss-Legendre evaluation of I~(a) as a quadratic in a.

    One pass accumulates the w-moments of j~'(u - w) needed by I1 (degrees
    0..2), the reduced I2 and I3 integrands, and the log-weighted moments of
    I4, the last with the substitution rule on the panel touching w = 0.
    The propagated truncation bound multiplies the panel-constant pointwise
    j' bound by the exact absolute weight integral of each panel.
    """
    if kappa != evaluator.kappa:
        raise ValueError("kappa does not match the evaluator")
    if u < 1.0:
        raise ValueError("main-term integrals require u >= 1")
    if abs(rule.u - float(u)) > 0.0:
        raise ValueError("rule was built for a different u")
    evaluator.ensure_coverage(float(u))

    nodes, weights = rule.gauss_nodes()
    panels = rule.panels()
    bits = evaluator.table.params.precision_bits
    with working_context(bits):
        um = mpfr(u)
        t0 = t1 = t2 = mpfr(0)
        i2 = i3 = mpfr(0)
        l0 = l1 = l2 = mpfr(0)
        eA = eB = eC = 0.0
        first_panel = panels[0]
        for w_lo, w_hi in panels:
            in_unit = w_hi <= 1.0 + 1e-12  # I3/I4 region
            in_tail = w_lo >= 1.0 - 1e-12  # I2 region (w >= 1)
            is_log_panel = rule.log_panel and (w_lo, w_hi) == first_panel
            mid = 0.5 * (w_lo + w_hi)
            half = 0.5 * (w_hi - w_lo)
            for x, wgt in zip(nodes, weights):
                v = u - (mid + half * float(x))
                jp = evaluator.eval_j_prime(v).value_hp
                w = um - mpfr(v)
                wq = mpfr(wgt * half)
                base = wq * jp
                t0 += base
                t1 += base * w
                t2 += base * w * w
                if in_tail:
                    i2 += base / 2
                if in_unit:
                    i3 += base * w * w / 2
                    if not is_log_panel:
                        ml = -gmpy2.log(w)
                        l0 += base * ml
                        l1 += base * w * ml
                        l2 += base * w * w * ml
            # panel contribution to the propagated truncation bound
            b = evaluator.jp_truncation_bound(u - mid)
            eA += b * (w_hi - w_lo)
            eB += b * (w_hi ** 2 - w_lo ** 2)
            eC += b * (w_hi ** 3 - w_lo ** 3) / 3.0
            if in_tail:
                eC += kappa * b * (w_hi - w_lo) / 2.0
            if in_unit:
                eC += kappa * b * (w_hi ** 3 - w_lo ** 3) / 6.0
                lm = [_log_moment(w_hi, k) - _log_moment(w_lo, k) for k in (0, 1, 2)]
                eA += kappa * b * lm[0]
                eB += 2.0 * kappa * b * lm[1]
                eC += kappa * b * lm[2]

        if rule.log_panel:
            w_top = first_panel[1]
            nodes_s, weights_s = rule.gauss_nodes()
            edges = _log_sub_edges(w_top)
            for lo, hi in zip(edges[:-1], edges[1:]):
                mid = 0.5 * (lo + hi)
                half = 0.5 * (hi - lo)
                for x, wgt in zip(nodes_s, weights_s):
                    s = mpfr(mid + half * float(x))
                    w = gmpy2.exp(-s)
                    jp = evaluator.eval_j_prime(um - w).value_hp
                    f = mpfr(wgt * half) * s * w * jp
                    l0 += f
                    l1 += f * w
                    l2 += f * w * w

        A = t0 - kappa * l0
        B = 2 * (t1 - kappa * l1)
        C = t2 - kappa * (i2 + i3 + l2)

    return MainTermQuadratic(
        kappa=kappa,
        u=float(u),
        A=float(A),
        B=float(B),
        C=float(C),
        err_coeffs=(eA, eB, eC),
        t_moments=(float(t0), float(t1), float(t2)),
        i2=float(i2),
        i3=float(i3),
        log_moments=(float(l0), float(l1), float(l2)),
        hp=(A, B, C),
    )
