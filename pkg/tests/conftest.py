import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def _warm_pruned_kernel():
    # trigger numba compilation once so timed tests are not charged for it
    from pvarstat.pvar import pvar_dp

    path = np.concatenate(([0.0], np.cumsum(np.ones(200))))
    pvar_dp(path, 3.0, method="pruned")


def random_path(rng, n, lattice=False):
    """Cumulative path of n increments with a zero anchor."""
    if lattice:
        inc = rng.integers(-1, 2, n).astype(float)
    else:
        inc = rng.standard_normal(n)
    return np.concatenate(([0.0], np.cumsum(inc)))
