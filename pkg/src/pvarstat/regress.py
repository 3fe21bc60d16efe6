"""Simple regression on a grid-sampled weight function.

Observations are ``Y_j = beta * f(j/n) + X_j`` with linear-process noise.
The least-squares error is driven entirely by the f-weighted noise sum:
``sum_j f(j/n)**2 * (betahat - beta) = sum_j X_j f(j/n)``, an identity
that holds replicate by replicate and is asserted in the tests whenever
the noise path is observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import DegenerateDesignError, ValidationError
from .filters import FilterSpec, InnovationSpec, Series, simulate_path
from .funcspace import eval_grid
from .limits import EmpiricalSample
from .rng import map_indexed


@dataclass(frozen=True, eq=False)
class RegressionScenario:
    """One simulation setting: slope, weight function, noise model, size."""

    beta: float
    f: object
    filter_spec: FilterSpec
    innovations: InnovationSpec
    n: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be at least 1")
        if float(np.sum(eval_grid(self.f, self.n) ** 2)) <= 0.0:
            raise DegenerateDesignError("design energy sum f(j/n)^2 must be positive")


def simulate_regression(s: RegressionScenario, stream: tuple[int, ...] = ()) -> Series:
    """Observations Y_1..Y_n; ``stream`` selects a derived replicate."""
    seed = (s.seed, *stream) if stream else s.seed
    x = simulate_path(s.filter_spec, s.innovations, s.n, seed)
    y = s.beta * eval_grid(s.f, s.n) + x.values
    return Series(y, origin="raw")


def _design(y, f) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(y, Series):
        if y.origin != "raw":
            raise ValidationError("regression expects raw observations")
        arr = y.values
    else:
        arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError("observations must be one-dimensional and non-empty")
    return arr, eval_grid(f, len(arr))


def lse_beta(y, f) -> float:
    """Least-squares slope: (sum f(j/n)^2)^-1 sum Y_j f(j/n)."""
    arr, g = _design(y, f)
    energy = float(np.sum(g ** 2))
    if energy <= 0.0:
        raise DegenerateDesignError("design energy sum f(j/n)^2 must be positive")
    return float(np.dot(arr, g)) / energy


def wn_stat(y, f, beta: float) -> float:
    """n^{-1/2} sum f(j/n)^2 (betahat - beta)."""
    arr, g = _design(y, f)
    energy = float(np.sum(g ** 2))
    if energy <= 0.0:
        raise DegenerateDesignError("design energy sum f(j/n)^2 must be positive")
    betahat = float(np.dot(arr, g)) / energy
    return float(energy * (betahat - beta) / np.sqrt(len(arr)))


def qn_stat(y, f, beta: float) -> float:
    """(sum f(j/n)^2)^{1/2} (betahat - beta)."""
    arr, g = _design(y, f)
    energy = float(np.sum(g ** 2))
    if energy <= 0.0:
        raise DegenerateDesignError("design energy sum f(j/n)^2 must be positive")
    betahat = float(np.dot(arr, g)) / energy
    return float(np.sqrt(energy) * (betahat - beta))


def _clt_replicate(r: int, scenario: RegressionScenario) -> float:
    # evaluate the error through its noise representation
    # sum X f / sum f^2, which is exactly beta-free; the estimator-path
    # computation lse_beta(Y) - beta agrees to rounding and is asserted
    # against this in the tests
    x = simulate_path(scenario.filter_spec, scenario.innovations,
                      scenario.n, (scenario.seed, r))
    g = eval_grid(scenario.f, scenario.n)
    error = float(np.dot(x.values, g)) / float(np.sum(g ** 2))
    return float(np.sqrt(scenario.n) * error)


def beta_clt_study(scenario: RegressionScenario, reps: int,
                   workers: int = 1) -> EmpiricalSample:
    """Monte Carlo sample of sqrt(n) (betahat - beta).

    The error is computed through the weighted noise sum, so the sample is
    bit-identical across values of beta under the same seed.  The limiting
    variance for a single weight function is
    ``sigma_eta**2 * A_psi**2 / integral(f^2)``.
    """
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    task = partial(_clt_replicate, scenario=scenario)
    values = map_indexed(task, reps, workers=workers)
    return EmpiricalSample(values, statistic="sqrt_n_beta_error",
                           params={"n": scenario.n, "beta": scenario.beta},
                           seed=scenario.seed)
