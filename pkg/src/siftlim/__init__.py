"""Sifting limits for the quadratic-weight (Lambda^2 Lambda^-) lower-bound sieve.

Evaluates the sieve functions j_kappa and j_kappa' for integer dimensions
2 <= kappa <= 10 through chained, truncated power series with rigorous
error budgets, computes the main-term integrals for linear weights, and
locates the sifting limits beta_kappa = 2u + 1.
"""

from .kernel_series import (
    ChainParameters,
    CoefficientTable,
    CoverageError,
    ErrorBudget,
    KernelValue,
    chain_anchor,
    chain_radii,
    eval_k,
    truncation_bound,
)
from .sieve_function import BoundedValue, PrecisionFaultError, SieveEvaluator
from .dde_oracle import DdeSolution, SegmentSolution, ToleranceError, solve_j, solve_j_prime
from .main_term_integrals import (
    LinearWeight,
    MainTermQuadratic,
    QuadratureRule,
    compute_quadratic,
    inner_reductions,
    log_endpoint_panel,
)
from .sifting_optimizer import (
    DHR_BETA,
    PUBLISHED_POINTS,
    REFERENCE_BETA,
    NoCrossingError,
    SiftingResult,
    Table2Row,
    find_beta,
    optimal_a,
    table2,
)

__version__ = "1.0.0"

__all__ = [
    "BoundedValue",
    "ChainParameters",
    "CoefficientTable",
    "CoverageError",
    "DHR_BETA",
    "DdeSolution",
    "ErrorBudget",
    "KernelValue",
    "LinearWeight",
    "MainTermQuadratic",
    "NoCrossingError",
    "PUBLISHED_POINTS",
    "PrecisionFaultError",
    "QuadratureRule",
    "REFERENCE_BETA",
    "SegmentSolution",
    "SieveEvaluator",
    "SiftingResult",
    "Table2Row",
    "ToleranceError",
    "chain_anchor",
    "chain_radii",
    "compute_quadratic",
    "eval_k",
    "find_beta",
    "inner_reductions",
    "log_endpoint_panel",
    "optimal_a",
    "solve_j",
    "solve_j_prime",
    "table2",
    "truncation_bound",
]
