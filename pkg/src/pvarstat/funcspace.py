"""Weight functions on [0, 1].

Step functions carry exact q-variation norms (their variation over any
partition is realized at piece representatives, so the norm reduces to the
discrete p-variation of the attained values).  Power and polynomial
families carry closed-form or critical-point norms; everything else is out
of scope for norms but still usable for grid evaluation and weighted sums.

Pieces are right-closed: ``f(x) = b_k`` for ``x`` in ``(t_{k-1}, t_k]``,
with ``f(0)`` stored separately, so the indicator of ``[0, t]`` is
represented with ``value_at_zero = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad

from .errors import ConfigurationError, UnsupportedExponentError, ValidationError
from .filters import Series
from .pvar import pvar_dp


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Piecewise-constant function with knots 0 = t_0 < ... < t_m = 1."""

    knots: tuple[float, ...]
    piece_values: tuple[float, ...]
    value_at_zero: float = 0.0

    def __post_init__(self):
        knots = tuple(float(t) for t in self.knots)
        pieces = tuple(float(b) for b in self.piece_values)
        if len(knots) < 2 or knots[0] != 0.0 or knots[-1] != 1.0:
            raise ValidationError("knots must start at 0 and end at 1")
        if any(b >= a for a, b in zip(knots[1:], knots[:-1])):
            raise ValidationError("knots must be strictly increasing")
        if len(pieces) != len(knots) - 1:
            raise ValidationError("need one piece value per knot interval")
        if not all(math.isfinite(v) for v in pieces + (self.value_at_zero,) + knots):
            raise ValidationError("step function values must be finite")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "piece_values", pieces)
        object.__setattr__(self, "value_at_zero", float(self.value_at_zero))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.knots, x, side="left")
        vals = np.concatenate(([self.value_at_zero], self.piece_values))
        out = vals[idx]
        return out if out.ndim else float(out)

    def attained_values(self) -> tuple[float, ...]:
        return (self.value_at_zero,) + self.piece_values

    def qvar(self, q: float) -> float:
        """Exact q-variation, via the discrete maximum over attained values."""
        return pvar_dp(np.asarray(self.attained_values()), q).value

    def sup_norm(self) -> float:
        return max(abs(v) for v in self.attained_values())

    def integral_sq(self) -> float:
        widths = np.diff(self.knots)
        return float(np.dot(np.asarray(self.piece_values) ** 2, widths))


@dataclass(frozen=True, eq=False)
class PowerFunction:
    """f(x) = x ** a on [0, 1] for a >= 0; monotone, so norms are closed form."""

    a: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a >= 0):
            raise ValidationError("power exponent must be a nonnegative real")
        object.__setattr__(self, "a", float(self.a))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = x ** self.a
        return out if out.ndim else float(out)

    def qvar(self, q: float) -> float:
        if q < 1:
            raise UnsupportedExponentError("q-variation requires q >= 1")
        if self.a == 0:
            return 0.0
        return 1.0  # |f(1) - f(0)| ** q with f(1) - f(0) = 1

    def sup_norm(self) -> float:
        return 1.0

    def integral_sq(self) -> float:
        return 1.0 / (2.0 * self.a + 1.0)


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Polynomial with ascending coefficients; norms via critical points.

    A polynomial is piecewise monotone between the real roots of its
    derivative, so its q-variation is the discrete maximum over the values
    attained at 0, interior critical points, and 1.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ValidationError("polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValidationError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = npoly.polyval(x, self.coeffs)
        return out if out.ndim else float(out)

    def _breakpoints(self) -> np.ndarray:
        if len(self.coeffs) <= 2:
            return np.array([0.0, 1.0])
        deriv = npoly.polyder(self.coeffs)
        if np.allclose(deriv, 0.0):
            return np.array([0.0, 1.0])
        roots = npoly.polyroots(deriv)
        real = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
        inner = real[(real > 0.0) & (real < 1.0)]
        return np.concatenate(([0.0], inner, [1.0]))

    def qvar(self, q: float) -> float:
        attained = npoly.polyval(self._breakpoints(), self.coeffs)
        return pvar_dp(attained, q).value

    def sup_norm(self) -> float:
        return float(np.max(np.abs(npoly.polyval(self._breakpoints(), self.coeffs))))

    def integral_sq(self) -> float:
        sq = npoly.polymul(self.coeffs, self.coeffs)
        return math.fsum(c / (k + 1.0) for k, c in enumerate(sq))


def indicator(t: float) -> StepFunction:
    """Indicator of [0, t] for 0 < t <= 1 (left-closed, so f(0) = 1)."""
    t = float(t)
    if not 0.0 < t <= 1.0:
        raise ValidationError("indicator endpoint must satisfy 0 < t <= 1")
    if t == 1.0:
        return StepFunction((0.0, 1.0), (1.0,), value_at_zero=1.0)
    return StepFunction((0.0, t, 1.0), (1.0, 0.0), value_at_zero=1.0)


def eval_grid(f, n: int) -> np.ndarray:
    """Exact evaluations (f(1/n), ..., f(n/n))."""
    if n < 1:
        raise ValidationError("grid size must be at least 1")
    x = np.arange(1, n + 1) / n
    try:
        out = np.asarray(f(x), dtype=float)
    except (TypeError, ValueError):
        out = np.array([float(f(v)) for v in x])
    if out.shape != x.shape:
        out = np.array([float(f(v)) for v in x])
    return out


def qvar_norm_step(f: StepFunction, q: float) -> tuple[float, float, float]:
    """(seminorm v_q ** (1/q), sup norm, their sum) for a step function."""
    if not isinstance(f, StepFunction):
        raise ValidationError("qvar_norm_step expects a StepFunction")
    return qvar_norm(f, q)


def qvar_norm(f, q: float) -> tuple[float, float, float]:
    """(seminorm, sup norm, full norm) for any function with computable norms."""
    q = float(q)
    if q < 1:
        raise UnsupportedExponentError("q-variation norms require q >= 1")
    if not hasattr(f, "qvar") or not hasattr(f, "sup_norm"):
        raise ConfigurationError(
            "q-variation norm is only available for step, power, and polynomial functions")
    v = f.qvar(q)
    seminorm = v ** (1.0 / q)
    sup = f.sup_norm()
    return seminorm, sup, sup + seminorm


def weighted_sum(x, f) -> float:
    """sum_{i=1..n} X_i f(i/n) for raw increments X."""
    if isinstance(x, Series):
        if x.origin != "raw":
            raise ValidationError("weighted_sum expects raw increments")
        arr = x.values
    else:
        arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError("x must be one-dimensional with at least one value")
    return float(np.dot(arr, eval_grid(f, len(arr))))


def integral_sq(f) -> float:
    """Exact integral of f**2 where the family allows, else adaptive quadrature."""
    if hasattr(f, "integral_sq"):
        return float(f.integral_sq())
    value, _ = quad(lambda x: float(f(x)) ** 2, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, limit=200)
    return float(value)


def riemann_sums(f, n: int) -> tuple[float, float]:
    """(I_n(f^2), I(f^2)): the grid average of f^2 and its integral."""
    grid = eval_grid(f, n)
    return float(np.mean(grid ** 2)), integral_sq(f)


def is_in_Fq_delta(f, q: float, delta: float) -> bool:
    """Membership in the norm-one ball with energy strictly above delta."""
    _, _, norm = qvar_norm(f, q)
    return norm <= 1.0 and integral_sq(f) > delta


def function_from_config(cfg: dict):
    """Weight function from its JSON description.

    Kinds: ``{"kind": "step", "knots": [...], "values": [...], "at_zero": v}``,
    ``{"kind": "power", "a": 2}``, ``{"kind": "poly", "coeffs": [...]}``,
    ``{"kind": "indicator", "t": 0.5}``.
    """
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValidationError("function config must be an object with a 'kind'")
    kind = cfg["kind"]
    known = {
        "step": {"kind", "knots", "values", "at_zero"},
        "power": {"kind", "a"},
        "poly": {"kind", "coeffs"},
        "indicator": {"kind", "t"},
    }
    if kind not in known:
        raise ValidationError(f"unknown function kind {kind!r}")
    extra = set(cfg) - known[kind]
    if extra:
        raise ValidationError(f"unknown keys for {kind!r} function: {sorted(extra)}")
    if kind == "step":
        if "knots" not in cfg or "values" not in cfg:
            raise ValidationError("step function config needs 'knots' and 'values'")
        return StepFunction(tuple(cfg["knots"]), tuple(cfg["values"]),
                            value_at_zero=float(cfg.get("at_zero", 0.0)))
    if kind == "power":
        if "a" not in cfg:
            raise ValidationError("power function config needs 'a'")
        return PowerFunction(float(cfg["a"]))
    if kind == "poly":
        if "coeffs" not in cfg:
            raise ValidationError("poly function config needs 'coeffs'")
        return Polynomial(tuple(cfg["coeffs"]))
    if "t" not in cfg:
        raise ValidationError("indicator function config needs 't'")
    return indicator(float(cfg["t"]))
