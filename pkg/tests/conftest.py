import pytest

from siftlim import SieveEvaluator, solve_j


@pytest.fixture(scope="session")
def evaluator_cache():
    """Shared per-(kappa, N) evaluator cache; tables are immutable."""
    cache = {}

    def get(kappa: int, N: int = 80) -> SieveEvaluator:
        key = (kappa, N)
        if key not in cache:
            cache[key] = SieveEvaluator.build(kappa, N=N)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def oracle_cache():
    """Shared method-of-steps solutions at tol 1e-9 up to u = kappa + 1.05."""
    cache = {}

    def get(kappa: int):
        if kappa not in cache:
            cache[kappa] = solve_j(kappa, kappa + 1.05, tol=1e-9)
        return cache[kappa]

    return get
