"""Monte Carlo realizations of the limit laws.

The limiting objects are marginals of the isonormal Gaussian process
(exactly normal with variance equal to the integral of f squared) and the
p-variation of a Wiener path, approximated by the p-variation of a scaled
Gaussian random walk.  Restricting partitions to the walk grid biases the
approximation low; the bias is quantified empirically by grid doubling,
which is how the default grid of 2**14 was chosen.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from .errors import TableMismatchError, UnsupportedExponentError, ValidationError
from .filters import FilterSpec, InnovationSpec, simulate_path
from .funcspace import integral_sq
from .pvar import pvar_dp, pvar_partial_sum
from .rng import GENERATOR_TAG, make_rng, map_indexed

# level*n within this of an integer counts as hitting the rank exactly
_RANK_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """Sorted Monte Carlo sample with its provenance."""

    values: np.ndarray
    statistic: str = ""
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        arr = np.sort(np.asarray(self.values, dtype=float))
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("sample must be one-dimensional and non-empty")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


def _sorted_values(sample) -> np.ndarray:
    if isinstance(sample, EmpiricalSample):
        return sample.values
    arr = np.asarray(sample, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError("sample must be one-dimensional and non-empty")
    return np.sort(arr)


def isonormal_marginal(f, reps: int, seed) -> EmpiricalSample:
    """I.i.d. draws from the exact marginal law: Normal(0, integral of f^2)."""
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    sigma = math.sqrt(integral_sq(f))
    rng = make_rng(seed)
    return EmpiricalSample(sigma * rng.standard_normal(reps),
                           statistic="isonormal_marginal",
                           params={"variance": sigma ** 2},
                           seed=seed if isinstance(seed, int) else None)


def scaled_walk_pvar(draws, p: float) -> float:
    """v_p of the walk with increments ``draws * len(draws) ** -0.5``."""
    z = np.asarray(draws, dtype=float)
    path = np.concatenate(([0.0], np.cumsum(z * len(z) ** -0.5)))
    return pvar_dp(path, p).value


def _check_wiener_p(p: float) -> float:
    p = float(p)
    if p <= 2:
        raise UnsupportedExponentError(
            "Wiener paths have finite p-variation only for p > 2; got p = %g" % p)
    return p


def _wiener_replicate(r: int, p: float, grid: int, seed: int) -> float:
    rng = make_rng((seed, r))
    return scaled_walk_pvar(rng.standard_normal(grid), p)


def wiener_pvar_sample(p: float, grid: int, reps: int, seed: int,
                       workers: int = 1) -> EmpiricalSample:
    """Monte Carlo sample of v_p of a scaled Gaussian random walk.

    Each replicate draws its own Philox stream from (seed, replicate), so
    the sample does not depend on worker count.
    """
    p = _check_wiener_p(p)
    if grid < 2:
        raise ValidationError("grid must be at least 2")
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    task = partial(_wiener_replicate, p=p, grid=int(grid), seed=int(seed))
    values = map_indexed(task, reps, workers=workers)
    return EmpiricalSample(values, statistic="wiener_pvar",
                           params={"p": p, "grid": int(grid)}, seed=int(seed))


def _null_replicate(r: int, filter_spec: FilterSpec, innov: InnovationSpec,
                    p: float, n: int, seed: int) -> float:
    x = simulate_path(filter_spec, innov, n, (seed, r))
    return float(n) ** (-p / 2.0) * pvar_partial_sum(x, p).value


def pvar_limit_null_sample(filter_spec: FilterSpec, innov: InnovationSpec,
                           p: float, n: int, reps: int, seed: int,
                           workers: int = 1) -> EmpiricalSample:
    """Sample of ``n**(-p/2) * v_p(S_n)`` for the simulated linear process."""
    p = _check_wiener_p(p)
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    task = partial(_null_replicate, filter_spec=filter_spec, innov=innov,
                   p=p, n=int(n), seed=int(seed))
    values = map_indexed(task, reps, workers=workers)
    return EmpiricalSample(values, statistic="pvar_limit_null",
                           params={"p": p, "n": int(n)}, seed=int(seed))


def ks_distance(a, b) -> float:
    """Exact sup distance between two empirical CDFs."""
    xa = _sorted_values(a)
    xb = _sorted_values(b)
    grid = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, grid, side="right") / len(xa)
    fb = np.searchsorted(xb, grid, side="right") / len(xb)
    return float(np.max(np.abs(fa - fb)))


def quantile(sample, level: float) -> float:
    """Nearest-rank quantile: smallest value with ecdf >= level.

    The rank ``ceil(level * n)`` is computed with a tiny tolerance so that
    levels that hit a rank exactly are not pushed up by float rounding.
    """
    values = _sorted_values(sample)
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ValidationError("quantile level must lie strictly between 0 and 1")
    n = len(values)
    t = level * n
    rank = math.floor(t) if t - math.floor(t) <= _RANK_EPS else math.ceil(t)
    rank = min(max(rank, 1), n)
    return float(values[rank - 1])


@dataclass(frozen=True, eq=False)
class CriticalValueTable:
    """Monte Carlo quantiles of the Wiener p-variation norm ||W||_(p).

    Reproducible from (seed, grid, reps, p); ``sample`` optionally keeps
    the full sorted norm sample so that p-values are exact upper-tail
    fractions instead of quantile interpolations.
    """

    p: float
    grid: int
    reps: int
    seed: int
    quantiles: dict[float, float]
    generator: str = GENERATOR_TAG
    sample: np.ndarray | None = None

    def __post_init__(self):
        q = {float(k): float(v) for k, v in self.quantiles.items()}
        levels = sorted(q)
        if not levels:
            raise ValidationError("table needs at least one quantile level")
        if any(not 0.0 < lv < 1.0 for lv in levels):
            raise ValidationError("quantile levels must lie strictly between 0 and 1")
        vals = [q[lv] for lv in levels]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValidationError("quantiles must be monotone in the level")
        object.__setattr__(self, "quantiles", q)
        if self.sample is not None:
            arr = np.sort(np.asarray(self.sample, dtype=float))
            arr.flags.writeable = False
            object.__setattr__(self, "sample", arr)

    def critical_value(self, level: float) -> float:
        """Stored quantile at the level, or recomputed from the sample."""
        level = float(level)
        for lv, val in self.quantiles.items():
            if abs(lv - level) <= 1e-9:
                return val
        if self.sample is not None:
            return quantile(self.sample, level)
        raise TableMismatchError(
            f"level {level} not in table (levels: {sorted(self.quantiles)}) and no sample stored")

    def p_value(self, stat: float) -> float:
        """Upper-tail probability of the statistic under the table's law.

        Exact fraction when the sample is stored; otherwise linear
        interpolation on the stored quantiles, clamped to their range
        (resolution is then limited by the stored levels).
        """
        stat = float(stat)
        if self.sample is not None:
            return float(np.mean(self.sample > stat))
        levels = np.array(sorted(self.quantiles))
        vals = np.array([self.quantiles[lv] for lv in levels])
        if stat <= vals[0]:
            return float(1.0 - levels[0])
        if stat >= vals[-1]:
            return float(1.0 - levels[-1])
        return float(1.0 - np.interp(stat, vals, levels))

    def to_dict(self) -> dict:
        out = {
            "p": self.p,
            "grid": self.grid,
            "reps": self.reps,
            "seed": self.seed,
            "quantiles": {repr(float(k)): float(v) for k, v in sorted(self.quantiles.items())},
            "generator": self.generator,
        }
        if self.sample is not None:
            out["sample"] = [float(v) for v in self.sample]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CriticalValueTable":
        known = {"p", "grid", "reps", "seed", "quantiles", "generator", "sample"}
        extra = set(data) - known
        if extra:
            raise ValidationError(f"unknown keys in critical-value table: {sorted(extra)}")
        missing = {"p", "grid", "reps", "seed", "quantiles", "generator"} - set(data)
        if missing:
            raise ValidationError(f"critical-value table missing keys: {sorted(missing)}")
        return cls(
            p=float(data["p"]),
            grid=int(data["grid"]),
            reps=int(data["reps"]),
            seed=int(data["seed"]),
            quantiles={float(k): float(v) for k, v in data["quantiles"].items()},
            generator=str(data["generator"]),
            sample=data.get("sample"),
        )

    def save(self, path) -> None:
        try:
            Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise ValidationError(f"cannot write table to {path}: {exc}") from exc

    @classmethod
    def load(cls, path) -> "CriticalValueTable":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read table from {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"table file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def build_cv_table(p: float, grid: int, reps: int,
                   levels=(0.90, 0.95, 0.99), seed: int = 0,
                   workers: int = 1, include_sample: bool = True) -> CriticalValueTable:
    """Quantile table of ||W||_(p) from a fresh Wiener p-variation sample."""
    sample = wiener_pvar_sample(p, grid, reps, seed, workers=workers)
    norms = sample.values ** (1.0 / float(p))
    quantiles = {float(lv): quantile(norms, lv) for lv in levels}
    return CriticalValueTable(p=float(p), grid=int(grid), reps=int(reps), seed=int(seed),
                              quantiles=quantiles, generator=GENERATOR_TAG,
                              sample=norms if include_sample else None)
