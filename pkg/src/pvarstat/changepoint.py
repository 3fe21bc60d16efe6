"""Multiple change-point testing on the mean of a short-memory process.

The observations are ``Y_j = mu_j + X_j`` where ``mu`` is piecewise
constant on intervals ``(tau_{k-1}, tau_k]``.  The test statistic is the
p-variation norm of the partial-sum path of Y, which coincides with the
supremum over segmentations of the l_p norm of the segment-count-scaled
segment means; its null distribution is calibrated against Monte Carlo
quantiles of the Wiener p-variation norm.

The limit law depends on the long-run gain only through its absolute
value (the p-variation of a path is symmetric under sign flips), so the
normalization uses ``|A_psi|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import (
    DegeneratePartitionError,
    TableMismatchError,
    UnsupportedExponentError,
    ValidationError,
)
from .filters import FilterSpec, InnovationSpec, Series, a_psi as filter_gain, simulate_path
from .funcspace import StepFunction, eval_grid
from .limits import CriticalValueTable
from .pvar import pvar_partial_sum
from .rng import map_indexed


@dataclass(frozen=True, eq=False)
class ChangeModel:
    """Piecewise-constant mean: levels ``beta`` on ``(tau_{k-1}, tau_k]``."""

    tau: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        tau = tuple(float(t) for t in self.tau)
        beta = tuple(float(b) for b in self.beta)
        if len(tau) < 2 or tau[0] != 0.0 or tau[-1] != 1.0:
            raise ValidationError("tau must start at 0 and end at 1")
        if any(t2 <= t1 for t1, t2 in zip(tau, tau[1:])):
            raise ValidationError("tau must be strictly increasing")
        if len(beta) != len(tau) - 1:
            raise ValidationError("need one level per interval")
        if not all(math.isfinite(v) for v in tau + beta):
            raise ValidationError("model parameters must be finite")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "beta", beta)

    @property
    def d_star(self) -> int:
        return len(self.beta)

    @classmethod
    def null(cls) -> "ChangeModel":
        """The no-change model: one segment at level zero."""
        return cls(tau=(0.0, 1.0), beta=(0.0,))

    def mean_function(self) -> StepFunction:
        return StepFunction(self.tau, self.beta, value_at_zero=self.beta[0])


@dataclass(frozen=True, eq=False)
class TestReport:
    """Outcome of one calibrated change-point test."""

    t_n: float
    normalized: float
    critical_value: float
    level: float
    reject: bool
    p_value: float
    candidate_change_points: tuple[float, ...]
    partition: tuple[int, ...]
    n: int
    p: float
    scale: float

    def to_dict(self) -> dict:
        return {
            "t_n": self.t_n,
            "normalized": self.normalized,
            "critical_value": self.critical_value,
            "level": self.level,
            "reject": self.reject,
            "p_value": self.p_value,
            "candidate_change_points": list(self.candidate_change_points),
            "partition": list(self.partition),
            "n": self.n,
            "p": self.p,
            "scale": self.scale,
        }


def simulate_cpm(model: ChangeModel, filter_spec: FilterSpec,
                 innov: InnovationSpec, n: int, seed) -> Series:
    """Observations Y_1..Y_n = mean(j/n) + X_j."""
    x = simulate_path(filter_spec, innov, n, seed)
    mu = eval_grid(model.mean_function(), n)
    return Series(mu + x.values, origin="raw")


def _segment_edges(tau, n: int) -> list[int]:
    edges = [math.floor(t * n) for t in tau]
    for a, b in zip(edges, edges[1:]):
        if b - a < 1:
            raise DegeneratePartitionError(
                f"a segment of {tau} contains no grid point at n={n}")
    return edges


def lse_segments(y, tau) -> tuple[np.ndarray, np.ndarray]:
    """Segment means and segment counts for a candidate partition.

    Segment k collects the indices with ``j/n`` in ``(tau_{k-1}, tau_k]``,
    i.e. ``floor(tau_{k-1} n) < j <= floor(tau_k n)``; its fitted level is
    the segment sample mean and the count matrix is diagonal.
    """
    if isinstance(y, Series):
        if y.origin != "raw":
            raise ValidationError("segment fitting expects raw observations")
        arr = y.values
    else:
        arr = np.asarray(y, dtype=float)
    tau = tuple(float(t) for t in tau)
    if len(tau) < 2 or tau[0] != 0.0 or tau[-1] != 1.0 or any(
            t2 <= t1 for t1, t2 in zip(tau, tau[1:])):
        raise ValidationError("tau must increase strictly from 0 to 1")
    edges = _segment_edges(tau, len(arr))
    counts = np.diff(edges)
    beta_hat = np.array([arr[a:b].mean() for a, b in zip(edges, edges[1:])])
    return beta_hat, counts.astype(np.int64)


def tn_statistic(y, p: float) -> tuple[float, tuple[int, ...]]:
    """Sup over segmentations of the l_p norm of count-scaled segment means.

    Computed as the p-variation norm of the partial-sum path; the returned
    partition indexes the path points ``0..n`` and its interior entries
    are the candidate change points.
    """
    res = pvar_partial_sum(y, p)
    return res.norm(), res.partition


def bartlett_lrv(y, bandwidth: int | None = None) -> float:
    """Bartlett-kernel long-run variance estimate of a demeaned series.

    Plug-in for ``sigma_eta**2 * A_psi**2`` when the noise parameters are
    unknown; default bandwidth is ``floor(4 (n/100)^(2/9))``.  Consistent
    under the null, misspecified under large mean changes.
    """
    if isinstance(y, Series):
        arr = y.values
    else:
        arr = np.asarray(y, dtype=float)
    n = len(arr)
    if n < 2:
        raise ValidationError("long-run variance needs at least two observations")
    if bandwidth is None:
        bandwidth = int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))
    bandwidth = int(bandwidth)
    if bandwidth < 0 or bandwidth >= n:
        raise ValidationError("bandwidth must lie in [0, n)")
    centered = arr - arr.mean()
    gamma0 = float(np.dot(centered, centered)) / n
    total = gamma0
    for k in range(1, bandwidth + 1):
        gamma_k = float(np.dot(centered[:-k], centered[k:])) / n
        total += 2.0 * (1.0 - k / (bandwidth + 1.0)) * gamma_k
    if total <= 0.0:
        raise ValidationError("long-run variance estimate is not positive")
    return total


def cp_test(y, p: float, alpha: float, table: CriticalValueTable,
            sigma_eta: float | None = None, a_psi: float | None = None,
            estimate_lrv: bool = False, bandwidth: int | None = None) -> TestReport:
    """Calibrated test of the no-change hypothesis.

    Rejects when ``T_n / (sqrt(n) * scale)`` exceeds the table's (1-alpha)
    quantile, where ``scale`` is ``sigma_eta * |A_psi|`` for known noise
    parameters or the Bartlett plug-in square root under ``estimate_lrv``.
    """
    if isinstance(y, Series):
        arr = y.values
    else:
        arr = np.asarray(y, dtype=float)
    if float(p) <= 2.0:
        raise UnsupportedExponentError(
            "the calibrated test needs p > 2 (Wiener paths have finite "
            "p-variation only there)")
    if not 0.0 < float(alpha) < 1.0:
        raise ValidationError("alpha must lie strictly between 0 and 1")
    if abs(table.p - float(p)) > 1e-9:
        raise TableMismatchError(f"table was built for p={table.p}, test asked for p={p}")
    if estimate_lrv:
        scale = math.sqrt(bartlett_lrv(arr, bandwidth))
    else:
        if sigma_eta is None or a_psi is None:
            raise ValidationError("sigma_eta and a_psi are required unless estimate_lrv is set")
        if not (sigma_eta > 0 and a_psi != 0):
            raise ValidationError("sigma_eta must be positive and a_psi nonzero")
        scale = float(sigma_eta) * abs(float(a_psi))
    n = len(arr)
    t_n, partition = tn_statistic(arr, p)
    normalized = t_n / (math.sqrt(n) * scale)
    critical = table.critical_value(1.0 - float(alpha))
    return TestReport(
        t_n=float(t_n),
        normalized=float(normalized),
        critical_value=float(critical),
        level=float(alpha),
        reject=bool(normalized > critical),
        p_value=table.p_value(normalized),
        candidate_change_points=tuple(k / n for k in partition[1:-1]),
        partition=tuple(partition),
        n=n,
        p=float(p),
        scale=float(scale),
    )


def drift_functional(model: ChangeModel, n: int, p: float) -> float:
    """sqrt(n) * (sum_k (tau_k - tau_{k-1})^p |beta_k|^p)^(1/p).

    Power diverges exactly when this does; it is zero under the null.
    """
    total = sum((t2 - t1) ** p * abs(b) ** p
                for t1, t2, b in zip(model.tau, model.tau[1:], model.beta))
    return math.sqrt(n) * total ** (1.0 / p)


def _study_replicate(r: int, model: ChangeModel, filter_spec: FilterSpec,
                     innov: InnovationSpec, n: int, p: float, scale: float,
                     critical: float, seed_key: tuple[int, ...]) -> bool:
    y = simulate_cpm(model, filter_spec, innov, n, (*seed_key, r))
    t_n, _ = tn_statistic(y.values, p)
    return bool(t_n / (math.sqrt(n) * scale) > critical)


def size_power_study(scenarios, filter_spec: FilterSpec, innov: InnovationSpec,
                     p: float, ns, reps: int, seed: int, table: CriticalValueTable,
                     alpha: float = 0.05, sigma_eta: float | None = None,
                     a_psi: float | None = None, workers: int = 1) -> list[dict]:
    """Rejection rates over a grid of models and sample sizes.

    ``scenarios`` is a list of (scenario_id, ChangeModel).  Noise
    parameters default to the simulation truth (innovation sigma and the
    filter's long-run gain).  Rows carry the drift functional so power
    can be read against the divergence rate.
    """
    if sigma_eta is None:
        sigma_eta = innov.sigma_eta
    if a_psi is None:
        a_psi = filter_gain(filter_spec)
    scale = float(sigma_eta) * abs(float(a_psi))
    if scale <= 0:
        raise ValidationError("sigma_eta * |a_psi| must be positive")
    critical = table.critical_value(1.0 - float(alpha))
    if abs(table.p - float(p)) > 1e-9:
        raise TableMismatchError(f"table was built for p={table.p}, study asked for p={p}")
    rows = []
    for si, (scenario_id, model) in enumerate(scenarios):
        for ni, n in enumerate(ns):
            task = partial(_study_replicate, model=model, filter_spec=filter_spec,
                           innov=innov, n=int(n), p=float(p), scale=scale,
                           critical=critical, seed_key=(int(seed), si, ni))
            flags = map_indexed(task, reps, workers=workers)
            rejections = int(sum(flags))
            rows.append({
                "scenario_id": scenario_id,
                "n": int(n),
                "drift": drift_functional(model, int(n), float(p)),
                "rejections": rejections,
                "reps": int(reps),
                "rate": rejections / reps,
            })
    return rows
