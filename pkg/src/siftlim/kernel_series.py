"""Chained, truncated power-series tables for the kernel functions K_n(u, lam).

The kernels are defined by K_0(u, lam) = u^lam for u > 0 and

    K_n(u, lam) = u^lam * int_n^u t^(-lam-1) K_{n-1}(t-1, lam) dt,   u > n >= 1,

with K_n(u, lam) = 0 for u <= n.  They are the building blocks of the
alternating decomposition of the sieve function j_kappa and its derivative.

Each K_n(., lam) is represented by a chain of power series about the centers
n + c_nu, where c_nu = (3/2)^nu - 1 is the Grupp-Richert chain-of-circles
sequence; series nu is used on the interval n + c_nu < u <= n + c_{nu+1}, so
successive terms shrink by a factor of about 2.  Coefficients are generated
recursively (in n for lam = 0, then lifted in lam), truncated at degree N, and
chained: the constant coefficient of circle nu is the truncated circle nu - 1
series evaluated at the new center.  Every truncated evaluation carries the
rigorous error budget lam! * M_{nu,lam} / 2^(N-lam), valid for c_nu <= 19.
"""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, NamedTuple

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .precision import DEFAULT_PRECISION_BITS, horner, working_context

#: Largest center offset for which the coefficient and truncation lemmas hold.
LEMMA_C_LIMIT = 19.0

TWO_TERM = "two_term"
SUMMATION = "summation"


class CoverageError(ValueError):
    """An argument lies beyond the circles held by a coefficient table."""


def chain_radii(nu_max: int):
    """Center offsets c_nu = (3/2)^nu - 1 for 0 <= nu <= nu_max + 1.

    The values are dyadic rationals and exact in the working precision.
    Consecutive differences satisfy c_{nu+1} - c_nu = (1/2) (3/2)^nu.
    """
    if nu_max < 0:
        raise ValueError("nu_max must be nonnegative")
    return tuple(mpfr(gmpy2.mpq(3, 2) ** nu - 1) for nu in range(nu_max + 2))


@dataclass(frozen=True)
class ChainParameters:
    """Truncation order, circle count, and working precision of a table.

    `radii` holds c_0, ..., c_{nu_max+1}; the last entry is the outer edge
    of the last circle's interval, not a usable expansion center.
    """

    N: int = 80
    nu_max: int = 7
    precision_bits: int = DEFAULT_PRECISION_BITS
    radii: tuple = field(init=False, repr=False)
    radii_f: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("truncation order N must be at least 2")
        if self.nu_max < 0:
            raise ValueError("nu_max must be nonnegative")
        if self.precision_bits < 24:
            # precisions below double are only useful for exercising the
            # cancellation guard
            raise ValueError("precision_bits must be at least 24")
        with working_context(self.precision_bits):
            radii = chain_radii(self.nu_max)
        if float(radii[self.nu_max]) > LEMMA_C_LIMIT:
            raise ValueError(
                f"c_{self.nu_max} = {float(radii[self.nu_max]):.4g} exceeds "
                f"{LEMMA_C_LIMIT}, outside the validity of the error bounds"
            )
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "radii_f", tuple(float(r) for r in radii))

    def circle_index(self, offset: float) -> int:
        """Circle nu with c_nu < offset <= c_{nu+1}; junction offsets c_{nu+1} belong to circle nu."""
        if offset > self.radii_f[self.nu_max + 1]:
            raise CoverageError(
                f"offset {offset:.6g} exceeds the last circle edge "
                f"{self.radii_f[self.nu_max + 1]:.6g}"
            )
        # index of the first radius >= offset, shifted to the interval index
        nu = bisect_left(self.radii_f, offset, lo=1) - 1
        return min(nu, self.nu_max)


@dataclass(frozen=True)
class ErrorBudget:
    """Truncation budgets M_nu and M_{nu,lam} of the chained series.

    m0[nu] = M_nu = 4 * prod_{l<=nu} (7 + c_l)/3 bounds the lam = 0 chain;
    mlam[lam][nu] = M_{nu,lam} = sum_{k<=nu} (c_{k+1} - c_k) M_{k,lam-1}
    extends it to lifted orders, with mlam[0] = m0.  The truncated series
    of circle nu at order lam then deviates from the exact kernel by at
    most lam! * M_{nu,lam} / 2^(N-lam).
    """

    m0: tuple
    mlam: tuple
    N: int

    @classmethod
    def from_params(cls, params: ChainParameters, lam_max: int) -> "ErrorBudget":
        if lam_max >= params.N:
            raise ValueError("budget requires lam < N")
        with working_context(params.precision_bits):
            radii = params.radii
            m0 = []
            acc = mpfr(4)
            for nu in range(params.nu_max + 1):
                acc = acc * (7 + radii[nu]) / 3
                m0.append(acc)
            m0 = tuple(m0)
            mlam = [m0]
            for lam in range(1, lam_max + 1):
                below = mlam[lam - 1]
                run = mpfr(0)
                row = []
                for nu in range(params.nu_max + 1):
                    run += (radii[nu + 1] - radii[nu]) * below[nu]
                    row.append(run)
                mlam.append(tuple(row))
        return cls(m0=m0, mlam=tuple(mlam), N=params.N)

    @property
    def lam_max(self) -> int:
        return len(self.mlam) - 1

    @property
    def nu_max(self) -> int:
        return len(self.m0) - 1


def truncation_bound(budget: ErrorBudget, nu: int, lam: int) -> float:
    """Rigorous bound lam! * M_{nu,lam} / 2^(N-lam) on a truncated evaluation.

    Nondecreasing in both nu and lam.  Rejects arguments outside the
    hypotheses of the underlying lemmas (circle held by the budget,
    0 <= lam < N).
    """
    if not 0 <= nu <= budget.nu_max:
        raise ValueError(f"circle index {nu} outside budget range")
    if not 0 <= lam <= budget.lam_max:
        raise ValueError(f"series order {lam} outside budget range")
    if lam >= budget.N:
        raise ValueError("truncation bound requires lam < N")
    return float(
        gmpy2.factorial(lam) * budget.mlam[lam][nu] / mpfr(2) ** (budget.N - lam)
    )


def base_coefficients_lambda0(n: int, c, N: int = 80):
    """Closed-form series coefficients b_j(n, c) of K_n(u, 0) about u = n + c.

    Only n in {0, 1, 2} have closed forms; higher rows come from the
    recursion.  The constant coefficient for n = 2 is K_2(2 + c), computed
    here by Gauss-Legendre quadrature of int_2^{2+c} log(t-1)/t dt (node
    placement limits it to roughly 1e-14 absolute accuracy; all other
    entries are exact to working precision).  Runs in the caller's MPFR
    context.
    """
    if n not in (0, 1, 2):
        raise ValueError("closed forms exist only for n in {0, 1, 2}")
    cf = float(c)
    if not 0 <= cf <= LEMMA_C_LIMIT:
        raise ValueError(f"center offset must lie in [0, {LEMMA_C_LIMIT}]")
    c = mpfr(c)
    row = [mpfr(0)] * (N + 1)
    if n == 0:
        row[0] = mpfr(1)
        return tuple(row)
    if n == 1:
        row[0] = gmpy2.log(1 + c)
        for j in range(1, N + 1):
            row[j] = mpfr(-1) ** (j - 1) / (j * (1 + c) ** j)
        return tuple(row)
    row[0] = _k2_value(c)
    row[1] = gmpy2.log(1 + c) / (2 + c)
    ratio = (2 + c) / (1 + c)
    partial = mpfr(0)  # sum_{l=1}^{j-1} ratio^l / l
    power = mpfr(1)
    for j in range(2, N + 1):
        power *= ratio
        partial += power / (j - 1)
        row[j] = mpfr(-1) ** (j - 1) / (j * (2 + c) ** j) * (gmpy2.log(1 + c) - partial)
    return tuple(row)


_GL64 = np.polynomial.legendre.leggauss(64)


def _k2_value(c: mpfr) -> mpfr:
    """K_2(2 + c) = int_2^{2+c} log(t-1)/t dt by 64-node Gauss-Legendre."""
    if c == 0:
        return mpfr(0)
    nodes, weights = _GL64
    mid = 2 + c / 2
    half = c / 2
    acc = mpfr(0)
    for x, w in zip(nodes, weights):
        t = mid + half * mpfr(x)
        acc += mpfr(w) * gmpy2.log(t - 1) / t
    return acc * half


def recur_coefficients(prev_row, n: int, c, b0) -> tuple:
    """Two-term recursion for the lam = 0 coefficients at row n >= 1.

    Given the complete row for n - 1 about the same center and the anchor
    b0 = K_n(n + c) from the chain, fills

        b_j(n, c) = (b_{j-1}(n-1, c) - (j-1) b_{j-1}(n, c)) / (j (n + c)).

    This is the production path; it involves one subtraction of
    like-magnitude terms per step and is stabler than the summation form.
    """
    if n < 1:
        raise ValueError("recursion applies to n >= 1")
    N = len(prev_row) - 1
    center = n + mpfr(c)
    row = [mpfr(0)] * (N + 1)
    row[0] = mpfr(b0)
    for j in range(1, N + 1):
        row[j] = (prev_row[j - 1] - (j - 1) * row[j - 1]) / (j * center)
    return tuple(row)


def recur_coefficients_summation(prev_row, n: int, c, b0) -> tuple:
    """Summation-form recursion, kept as an independent cross-check path.

        b_j(n, c) = (-1)^(j-1) / (j (n+c)^j) * sum_{l<j} (-1)^l b_l(n-1, c) (n+c)^l

    Mathematically identical to `recur_coefficients`; accumulates rounding
    over the j-term sum, so agreement is to a modest multiple of the working
    precision rather than exact.
    """
    if n < 1:
        raise ValueError("recursion applies to n >= 1")
    N = len(prev_row) - 1
    center = n + mpfr(c)
    row = [mpfr(0)] * (N + 1)
    row[0] = mpfr(b0)
    running = mpfr(0)  # sum_{l=0}^{j-1} (-1)^l b_l(n-1) center^l
    power = mpfr(1)  # center^(j-1) while processing j
    sign = 1
    for j in range(1, N + 1):
        running += sign * prev_row[j - 1] * power
        power *= center
        # power now equals center^j; sign still (-1)^(j-1)
        row[j] = sign * running / (j * power)
        sign = -sign
    return tuple(row)


def lift_lambda(lower_row, lam: int, b0) -> tuple:
    """Lift coefficients from order lam - 1 to lam at a fixed (n, circle).

        b_j(n, c, lam) = (lam / j) b_{j-1}(n, c, lam - 1),  1 <= j <= N,

    with the constant term b0 supplied by the chain anchor.
    """
    if lam < 1:
        raise ValueError("lift applies to lam >= 1")
    N = len(lower_row) - 1
    if lam >= N:
        raise ValueError("lift requires lam < N")
    row = [mpfr(0)] * (N + 1)
    row[0] = mpfr(b0)
    for j in range(1, N + 1):
        row[j] = lam * lower_row[j - 1] / j
    return tuple(row)


class KernelValue(NamedTuple):
    """A truncated-series kernel evaluation with its rigorous error bound."""

    value: mpfr
    bound: float


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Immutable per-dimension store of truncated series coefficients.

    Rows are keyed by (lam, n, nu) and hold the N + 1 coefficients of the
    circle-nu series of K_n(., lam).  Built once by `build`; evaluation is
    pure and safe to share across threads.
    """

    kappa: int
    params: ChainParameters
    n_max: int
    lam_max: int
    budget: ErrorBudget
    rows: Mapping = field(repr=False)

    @classmethod
    def build(
        cls,
        kappa: int,
        params: ChainParameters | None = None,
        n_max: int = 11,
        lam_max: int | None = None,
        recursion: str = TWO_TERM,
    ) -> "CoefficientTable":
        """Construct all rows for 0 <= lam <= lam_max, 0 <= n <= n_max.

        Rows are built with lam ascending, then n, then nu, so each step's
        dependencies (previous circle at the same lam, previous n at lam = 0,
        previous lam at the same position) already exist.
        """
        if kappa < 1:
            raise ValueError("kappa must be a positive integer")
        if params is None:
            params = ChainParameters()
        if lam_max is None:
            lam_max = kappa
        if not 0 <= lam_max < params.N:
            raise ValueError("table requires 0 <= lam_max < N")
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        if recursion not in (TWO_TERM, SUMMATION):
            raise ValueError(f"unknown recursion {recursion!r}")
        recur = recur_coefficients if recursion == TWO_TERM else recur_coefficients_summation

        N = params.N
        rows = {}
        with working_context(params.precision_bits):
            radii = params.radii
            one_row = (mpfr(1),) + (mpfr(0),) * N
            for lam in range(lam_max + 1):
                for n in range(n_max + 1):
                    for nu in range(params.nu_max + 1):
                        if lam == 0 and n == 0:
                            rows[(lam, n, nu)] = one_row  # K_0(u, 0) = 1
                            continue
                        if nu == 0:
                            b0 = mpfr(0)  # K_n(n, lam) = 0 and K_0(0, lam) = 0
                        else:
                            b0 = horner(rows[(lam, n, nu - 1)], radii[nu] - radii[nu - 1])
                        if lam == 0:
                            rows[(lam, n, nu)] = recur(rows[(0, n - 1, nu)], n, radii[nu], b0)
                        else:
                            rows[(lam, n, nu)] = lift_lambda(rows[(lam - 1, n, nu)], lam, b0)
        budget = ErrorBudget.from_params(params, lam_max)
        return cls(
            kappa=kappa,
            params=params,
            n_max=n_max,
            lam_max=lam_max,
            budget=budget,
            rows=MappingProxyType(rows),
        )

    def row(self, lam: int, n: int, nu: int) -> tuple:
        return self.rows[(lam, n, nu)]

    @property
    def coverage_limit(self) -> float:
        """Largest argument u the table can evaluate at any kernel index."""
        return min(self.n_max + 1.0, self.params.radii_f[self.params.nu_max + 1])


def chain_anchor(table: CoefficientTable, n: int, nu: int, lam: int) -> mpfr:
    """Constant coefficient of circle nu from the circle nu - 1 series.

    Evaluates the truncated circle nu - 1 series at the new center
    n + c_nu, an offset of c_nu - c_{nu-1}, strictly inside the previous
    disk of convergence.  By construction this equals the stored
    row(lam, n, nu)[0].
    """
    if nu < 1:
        raise ValueError("chain anchors exist for nu >= 1")
    params = table.params
    with working_context(params.precision_bits):
        delta = params.radii[nu] - params.radii[nu - 1]
        return horner(table.row(lam, n, nu - 1), delta)


def eval_k(table: CoefficientTable, n: int, lam: int, u) -> KernelValue:
    """Evaluate the truncated kernel series for K_n(u, lam) with its bound.

    Returns exactly zero (with zero bound) on the support boundary u <= n;
    otherwise selects the circle nu with n + c_nu < u <= n + c_{nu+1},
    evaluates the degree-N polynomial at u - (n + c_nu) by Horner's scheme,
    and pairs it with the budget bound lam! * M_{nu,lam} / 2^(N-lam).
    Raises CoverageError beyond the last circle.
    """
    if not 0 <= n <= table.n_max:
        raise ValueError(f"kernel index n = {n} outside table range")
    if not 0 <= lam <= table.lam_max:
        raise ValueError(f"order lam = {lam} outside table range")
    uf = float(u)
    if uf <= n:
        return KernelValue(mpfr(0), 0.0)
    params = table.params
    nu = params.circle_index(uf - n)
    with working_context(params.precision_bits):
        x = mpfr(u) - (n + params.radii[nu])
        value = horner(table.row(lam, n, nu), x)
    return KernelValue(value, truncation_bound(table.budget, nu, lam))


# ---------------------------------------------------------------------------
# Optional JSON dump of a table (test fixtures; not needed at runtime).

def table_to_json(table: CoefficientTable) -> dict:
    """Serializable dict: header plus coefficients in build order.

    Coefficients are decimal strings that round-trip exactly at the
    table's working precision.
    """
    header = {
        "kappa": table.kappa,
        "N": table.params.N,
        "nu_max": table.params.nu_max,
        "precision_bits": table.params.precision_bits,
        "n_max": table.n_max,
        "lam_max": table.lam_max,
    }
    coeffs = []
    for lam in range(table.lam_max + 1):
        for n in range(table.n_max + 1):
            for nu in range(table.params.nu_max + 1):
                coeffs.append([str(b) for b in table.row(lam, n, nu)])
    return {"header": header, "coefficients": coeffs}


def table_from_json(data: dict) -> CoefficientTable:
    """Inverse of `table_to_json`."""
    h = data["header"]
    params = ChainParameters(N=h["N"], nu_max=h["nu_max"], precision_bits=h["precision_bits"])
    rows = {}
    it = iter(data["coefficients"])
    with working_context(params.precision_bits):
        for lam in range(h["lam_max"] + 1):
            for n in range(h["n_max"] + 1):
                for nu in range(params.nu_max + 1):
                    rows[(lam, n, nu)] = tuple(mpfr(s) for s in next(it))
    return CoefficientTable(
        kappa=h["kappa"],
        params=params,
        n_max=h["n_max"],
        lam_max=h["lam_max"],
        budget=ErrorBudget.from_params(params, h["lam_max"]),
        rows=MappingProxyType(rows),
    )


def dump_table(table: CoefficientTable, path) -> None:
    with open(path, "w") as fh:
        json.dump(table_to_json(table), fh)


def load_table(path) -> CoefficientTable:
    with open(path) as fh:
        return table_from_json(json.load(fh))
