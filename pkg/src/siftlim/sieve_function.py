"""Evaluation of the sieve function j_kappa and its derivative.

Both are assembled from the truncated kernel tables via the alternating
decompositions

    j_kappa(u)  = e^(-kappa*gamma)/kappa!     * sum_{0 <= n < u} (-kappa)^n K_n(u, kappa),
    j_kappa'(u) = e^(-kappa*gamma)/(kappa-1)! * sum_{0 <= n < u} (-kappa)^n K_n(u, kappa-1),

together with a rigorous uniform truncation bound obtained by summing the
per-kernel budgets with weights kappa^n.  The alternating terms can exceed
the sum by a couple of orders of magnitude, so the summation runs at the
table's extended working precision and every evaluation updates a
cancellation diagnostic; if the observed cancellation could eat into the
guaranteed digits the evaluator raises instead of returning a value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .kernel_series import CoefficientTable, CoverageError, eval_k, truncation_bound
from .precision import euler_gamma, machine_epsilon, working_context

#: An evaluation is rejected when (max term / |sum|) * unit roundoff exceeds this.
CANCELLATION_GUARD = 1e-18


class PrecisionFaultError(ArithmeticError):
    """Cancellation in the alternating sum exhausts the working precision."""


@dataclass(frozen=True)
class BoundedValue:
    """A function value with a rigorous truncation-error bound."""

    value: float
    bound: float
    value_hp: mpfr = field(repr=False, compare=False, default=None)


class SieveEvaluator:
    """Evaluates j_kappa and j_kappa' from a coefficient table.

    Evaluation is pure and reentrant; `cancellation_log` is a monotone
    diagnostic (worst max-term/|sum| ratio seen so far) and the only
    mutable state.
    """

    def __init__(self, table: CoefficientTable):
        self.table = table
        self.kappa = table.kappa
        if table.lam_max < table.kappa:
            raise ValueError("table must hold orders up to lam = kappa")
        with working_context(table.params.precision_bits):
            self.gamma = euler_gamma()
            self.front_j = gmpy2.exp(-self.kappa * self.gamma) / gmpy2.factorial(self.kappa)
            self.front_jp = self.kappa * self.front_j
        self.cancellation_log = 0.0
        self._eps = machine_epsilon(table.params.precision_bits)

    @classmethod
    def build(cls, kappa: int, **table_kwargs) -> "SieveEvaluator":
        """Build a fresh coefficient table for `kappa` and wrap it."""
        from .kernel_series import ChainParameters

        params_keys = {"N", "nu_max", "precision_bits"}
        params_kwargs = {k: v for k, v in table_kwargs.items() if k in params_keys}
        rest = {k: v for k, v in table_kwargs.items() if k not in params_keys}
        params = ChainParameters(**params_kwargs) if params_kwargs else None
        table = CoefficientTable.build(kappa, params=params, **rest)
        return cls(table)

    @property
    def coverage_limit(self) -> float:
        return self.table.coverage_limit

    def ensure_coverage(self, u: float) -> None:
        if u > self.coverage_limit:
            raise CoverageError(
                f"u = {u:.6g} beyond coverage limit {self.coverage_limit:.6g} "
                f"(n_max = {self.table.n_max}, nu_max = {self.table.params.nu_max})"
            )

    def _alternating_sum(self, u, lam: int, front: mpfr) -> BoundedValue:
        uf = float(u)
        if uf <= 0.0:
            return BoundedValue(0.0, 0.0, mpfr(0))
        self.ensure_coverage(uf)
        kappa = self.kappa
        table = self.table
        with working_context(table.params.precision_bits):
            total = mpfr(0)
            bound = 0.0
            max_term = mpfr(0)
            weight = 1  # (-kappa)^n, exact integer
            for n in range(table.n_max + 1):
                if n >= uf:
                    break
                kv = eval_k(table, n, lam, u)
                term = weight * kv.value
                total += term
                bound += abs(weight) * kv.bound
                max_term = max(max_term, abs(term))
                weight *= -kappa
            if total != 0:
                ratio = float(max_term / abs(total))
                if ratio > self.cancellation_log:
                    self.cancellation_log = ratio
                if ratio * self._eps > CANCELLATION_GUARD:
                    raise PrecisionFaultError(
                        f"cancellation ratio {ratio:.3g} at u = {uf:.6g} exceeds the "
                        f"precision guard for {table.params.precision_bits}-bit arithmetic"
                    )
            value_hp = front * total
            return BoundedValue(float(value_hp), float(front) * bound, value_hp)

    def eval_j(self, u) -> BoundedValue:
        """j_kappa(u) with its truncation bound; exactly 0 for u <= 0."""
        return self._alternating_sum(u, self.kappa, self.front_j)

    def eval_j_prime(self, u) -> BoundedValue:
        """j_kappa'(u) with its truncation bound; exactly 0 for u <= 0."""
        return self._alternating_sum(u, self.kappa - 1, self.front_jp)

    def _point_bound(self, v: float, lam: int, front: float) -> float:
        """Truncation bound of the decomposition at order lam, argument v."""
        if v <= 0.0:
            return 0.0
        self.ensure_coverage(v)
        table = self.table
        params = table.params
        bound = 0.0
        weight = 1
        for n in range(table.n_max + 1):
            if n >= v:
                break
            if v - n > 0.0:
                nu = params.circle_index(v - n)
                bound += weight * truncation_bound(table.budget, nu, lam)
            weight *= self.kappa
        return front * bound

    def jp_truncation_bound(self, v: float) -> float:
        """Pointwise rigorous bound |j~'(v) - j'(v)|; a step function of v."""
        return self._point_bound(v, self.kappa - 1, float(self.front_jp))

    def j_truncation_bound(self, v: float) -> float:
        """Pointwise rigorous bound |j~(v) - j(v)|."""
        return self._point_bound(v, self.kappa, float(self.front_j))

    def uniform_jp_error(self, u_max: float) -> float:
        """sup over (0, u_max] of the pointwise j' truncation bound.

        The bound is piecewise constant, changing only where a kernel
        gains support or crosses a circle junction, and nondecreasing in
        v, so the supremum is attained at u_max; the grid maximum is kept
        as a cheap safeguard of that monotonicity.
        """
        self.ensure_coverage(u_max)
        params = self.table.params
        grid = [u_max]
        for n in range(self.table.n_max + 1):
            for nu in range(params.nu_max + 1):
                v = n + params.radii_f[nu]
                if 0.0 < v < u_max:
                    grid.append(0.5 * (v + min(u_max, v + 0.25)))
        return max(self.jp_truncation_bound(v) for v in grid)
