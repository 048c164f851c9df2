import numpy as np
import pytest

from epblab import Environment


@pytest.fixture
def example_env() -> Environment:
    """Three alternatives, costs (4, 3, 2), budget 7, binary quality.

    Prior probability of quality 1 is (0.8, 0.6, 0.4); positive-signal
    probabilities are (0.7, 0.65, 0.6) at quality 1 and (0.3, 0.35, 0.4)
    at quality 0.
    """
    return Environment(
        costs=np.array([4.0, 3.0, 2.0]),
        budget=7.0,
        lmax=1,
        priors=np.array([[0.2, 0.8], [0.4, 0.6], [0.6, 0.4]]),
        q=np.array([[0.3, 0.7], [0.35, 0.65], [0.4, 0.6]]),
    )


def unit_env(m: int, budget: float) -> Environment:
    """Unit-cost instance with unremarkable binary-quality parameters."""
    return Environment(
        costs=np.ones(m),
        budget=budget,
        lmax=1,
        priors=np.full((m, 2), 0.5),
        q=np.tile([0.35, 0.65], (m, 1)),
    )


def costed_env(costs, budget: float, lmax: int = 1) -> Environment:
    costs = np.asarray(costs, dtype=float)
    m = len(costs)
    return Environment(
        costs=costs,
        budget=budget,
        lmax=lmax,
        priors=np.full((m, lmax + 1), 1.0 / (lmax + 1)),
        q=np.vstack([np.linspace(0.2, 0.8, lmax + 1) + 0.002 * j for j in range(m)]),
    )


def profile_from_counts(counts, n: int) -> np.ndarray:
    """Profile where the first counts[j] agents approve alternative j."""
    m = len(counts)
    profile = np.zeros((n, m), dtype=np.uint8)
    for j, c in enumerate(counts):
        profile[:c, j] = 1
    return profile
