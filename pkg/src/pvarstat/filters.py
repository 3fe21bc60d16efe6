"""Short-memory linear processes.

A process ``X_i = sum_{j>=0} psi_j eta_{i-j}`` is simulated from a filter
specification (geometric, finite, or callback-defined coefficients) and an
innovation specification (normalized to mean zero and variance
``sigma_eta ** 2`` exactly).  Infinite filters are truncated at the
smallest lag whose certified tail bound ``sum_{j>J} |psi_j|`` falls below
``truncation_tol``; pre-sample innovations are drawn so the simulated
segment is exactly stationary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateFilterError,
    ValidationError,
)
from .rng import make_rng

_FAMILIES = ("geometric", "finite", "callback")
_DISTRIBUTIONS = ("normal", "uniform", "rademacher", "student_t")
_CALLBACK_LAG_CAP = 1 << 24


@dataclass(frozen=True, eq=False)
class Series:
    """A finite real path: raw increments or a cumulative path.

    A cumulative series lists the path points themselves; raw increments
    get an implicit starting anchor of zero when accumulated.
    """

    values: np.ndarray
    origin: str = "raw"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("series must be one-dimensional with at least one value")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("series contains non-finite values")
        if self.origin not in ("raw", "cumulative"):
            raise ValidationError(f"origin must be 'raw' or 'cumulative', got {self.origin!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def cumulative(self) -> "Series":
        """Cumulative path with the zero anchor prepended; no-op if already cumulative."""
        if self.origin == "cumulative":
            return self
        path = np.concatenate(([0.0], np.cumsum(self.values)))
        return Series(path, origin="cumulative")


@dataclass(frozen=True, eq=False)
class FilterSpec:
    """Summable moving-average filter ``psi_0, psi_1, ...``.

    ``truncation_tol`` bounds the discarded tail ``sum_{j>J} |psi_j|``
    once the filter is truncated.  The long-run gain ``sum_j psi_j`` must
    be distinguishable from zero at that tolerance.
    """

    family: str
    phi: float = 0.0
    scale: float = 1.0
    coeffs: tuple[float, ...] = ()
    func: Callable[[int], float] | None = None
    tail_bound: Callable[[int], float] | None = None
    truncation_tol: float = 1e-12

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValidationError(f"unknown filter family {self.family!r}")
        if not (math.isfinite(self.truncation_tol) and self.truncation_tol > 0):
            raise ValidationError("truncation_tol must be a positive real")
        if self.family == "geometric":
            if not (math.isfinite(self.phi) and abs(self.phi) < 1):
                raise ValidationError("geometric ratio must satisfy |phi| < 1")
            if not math.isfinite(self.scale):
                raise ValidationError("geometric scale must be finite")
            if abs(self.scale / (1.0 - self.phi)) <= self.truncation_tol:
                raise DegenerateFilterError(
                    "filter sum is indistinguishable from zero at the truncation tolerance")
        elif self.family == "finite":
            coeffs = tuple(float(c) for c in self.coeffs)
            if not coeffs:
                raise ValidationError("finite filter needs at least one coefficient")
            if not all(math.isfinite(c) for c in coeffs):
                raise ValidationError("finite filter coefficients must be finite")
            if abs(math.fsum(coeffs)) <= self.truncation_tol:
                raise DegenerateFilterError(
                    "filter sum is indistinguishable from zero at the truncation tolerance")
            object.__setattr__(self, "coeffs", coeffs)
        else:
            if self.func is None:
                raise ConfigurationError("callback filter needs a coefficient function")
            if self.tail_bound is None:
                raise ConfigurationError(
                    "callback filter needs a certified tail bound: "
                    "a nonincreasing function J -> bound on sum_{j>J} |psi_j|")

    @classmethod
    def geometric(cls, phi: float, scale: float = 1.0, truncation_tol: float = 1e-12):
        """psi_j = scale * phi**j with |phi| < 1."""
        return cls(family="geometric", phi=float(phi), scale=float(scale),
                   truncation_tol=truncation_tol)

    @classmethod
    def finite(cls, coeffs, truncation_tol: float = 1e-12):
        """Finitely many coefficients psi_0..psi_J, used as given."""
        return cls(family="finite", coeffs=tuple(float(c) for c in coeffs),
                   truncation_tol=truncation_tol)

    @classmethod
    def from_callback(cls, func, tail_bound, truncation_tol: float = 1e-12):
        """Coefficients from ``func(j)`` with a user-certified tail bound."""
        return cls(family="callback", func=func, tail_bound=tail_bound,
                   truncation_tol=truncation_tol)


def truncate_filter(spec: FilterSpec) -> np.ndarray:
    """Coefficients ``psi_0..psi_J`` for the smallest certified lag J.

    J is the smallest index whose tail bound is at most ``truncation_tol``;
    finite filters pass through unchanged.
    """
    tol = spec.truncation_tol
    if spec.family == "finite":
        return np.asarray(spec.coeffs, dtype=float)
    if spec.family == "geometric":
        if spec.phi == 0.0:
            return np.array([spec.scale])
        ratio = abs(spec.phi)

        def tail(lag):
            return abs(spec.scale) * ratio ** (lag + 1) / (1.0 - ratio)

        rhs = tol * (1.0 - ratio) / abs(spec.scale)
        if rhs >= 1.0:
            lag = 0
        else:
            lag = max(0, math.ceil(math.log(rhs) / math.log(ratio)) - 1)
        while tail(lag) > tol:
            lag += 1
        while lag > 0 and tail(lag - 1) <= tol:
            lag -= 1
        return spec.scale * spec.phi ** np.arange(lag + 1)

    bound = spec.tail_bound
    if bound(0) <= tol:
        lag = 0
    else:
        hi = 1
        while bound(hi) > tol:
            hi *= 2
            if hi > _CALLBACK_LAG_CAP:
                raise ConfigurationError(
                    f"tail bound never certifies below {tol} within {_CALLBACK_LAG_CAP} lags")
        lo = hi // 2
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if bound(mid) <= tol:
                hi = mid
            else:
                lo = mid
        lag = hi
    coeffs = np.array([float(spec.func(j)) for j in range(lag + 1)])
    if not np.all(np.isfinite(coeffs)):
        raise ValidationError("callback filter produced non-finite coefficients")
    if abs(math.fsum(coeffs.tolist())) <= tol:
        raise DegenerateFilterError(
            "filter sum is indistinguishable from zero at the truncation tolerance")
    return coeffs


def a_psi(spec: FilterSpec) -> float:
    """Long-run gain ``sum_j psi_j``.

    Closed form for the geometric family, direct sums otherwise; for
    callback filters the error is bounded by ``truncation_tol``.
    """
    if spec.family == "geometric":
        return spec.scale / (1.0 - spec.phi)
    if spec.family == "finite":
        return math.fsum(spec.coeffs)
    return math.fsum(truncate_filter(spec).tolist())


@dataclass(frozen=True, eq=False)
class InnovationSpec:
    """I.i.d. driving noise: mean zero, variance ``sigma_eta ** 2`` exactly.

    Supported distributions: ``normal``, centered ``uniform``, scaled
    ``rademacher``, and normalized ``student_t`` with df > 2.
    """

    distribution: str
    sigma_eta: float = 1.0
    df: float | None = None

    def __post_init__(self):
        if self.distribution not in _DISTRIBUTIONS:
            raise ValidationError(f"unknown innovation distribution {self.distribution!r}")
        if not (math.isfinite(self.sigma_eta) and self.sigma_eta > 0):
            raise ValidationError("sigma_eta must be a positive real")
        if self.distribution == "student_t":
            if self.df is None or not (math.isfinite(self.df) and self.df > 2):
                raise ValidationError("student_t innovations need df > 2")
        elif self.df is not None:
            raise ValidationError(f"df only applies to student_t, not {self.distribution!r}")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        s = self.sigma_eta
        if self.distribution == "normal":
            return s * rng.standard_normal(size)
        if self.distribution == "uniform":
            half = s * math.sqrt(3.0)
            return rng.uniform(-half, half, size)
        if self.distribution == "rademacher":
            return s * (2.0 * rng.integers(0, 2, size=size) - 1.0)
        return s * rng.standard_t(self.df, size) / math.sqrt(self.df / (self.df - 2.0))


def simulate_path(filter_spec: FilterSpec, innov: InnovationSpec, n: int, seed) -> Series:
    """Length-``n`` sample of the linear process, deterministic in the seed.

    Draws the ``n + J`` innovations ``eta_{1-J}..eta_n`` in one block and
    convolves with the truncated filter, so ``X_i = sum_j psi_j eta_{i-j}``
    for i = 1..n matches the stationary process exactly.  ``seed`` may be
    an integer or a tuple of integers (derived replicate stream).
    """
    if n < 1:
        raise ValidationError("n must be at least 1")
    psi = truncate_filter(filter_spec)
    lag = len(psi) - 1
    rng = make_rng(seed)
    eta = innov.draw(rng, n + lag)
    x = np.convolve(eta, psi, mode="valid")
    return Series(x, origin="raw")
