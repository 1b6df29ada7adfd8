"""Loss families: value, slope g1 and curvature g2 in the linear predictor.

Three families are supported:

* ``Linear`` — mean-square loss ``0.5 * (xi - y)^2``.
* ``Logistic`` — cross-entropy against a sigmoid mean.
* ``Saturated`` — negative log-likelihood of a unit-variance Gaussian latent
  censored below ``l`` and above ``u``; censored observations are reported as
  the sentinel outputs ``lout`` / ``uout``.

All three expose the same scalar calculus: ``g1 = dL/dxi`` and
``g2 = d2L/dxi^2``.  Functions are vectorized over ``xi`` and ``y`` and accept
plain scalars as well.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from .errors import MalformedObservationError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SIGMOID_CLAMP = 1e-12


@dataclass(frozen=True)
class Linear:
    pass


@dataclass(frozen=True)
class Logistic:
    pass


@dataclass(frozen=True)
class Saturated:
    l: float
    u: float
    lout: float
    uout: float

    def __post_init__(self):
        if not (self.l < self.u):
            raise ValueError(f"censor thresholds must satisfy l < u, got l={self.l}, u={self.u}")


LossFamily = Union[Linear, Logistic, Saturated]


@dataclass(frozen=True)
class CurvatureBounds:
    """Curvature envelope ``mu_lower <= g2 <= mu_upper`` over ``|xi| <= predictor_bound``."""

    mu_lower: float
    mu_upper: float
    predictor_bound: float

    def __post_init__(self):
        if not (0.0 < self.mu_lower <= self.mu_upper < math.inf):
            raise ValueError("curvature bounds must satisfy 0 < mu_lower <= mu_upper < inf")


def sigmoid(x):
    return special.expit(x)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def norm_cdf(x):
    return special.ndtr(np.asarray(x, dtype=float))


def _mills_lower(x):
    """pdf/cdf ratio ``f(x)/F(x)``, stable in the far lower tail via erfcx."""
    x = np.asarray(x, dtype=float)
    return math.sqrt(2.0 / math.pi) / special.erfcx(-x / math.sqrt(2.0))


def saturation_h(x):
    """Curvature kernel ``(x f(x) F(x) + f(x)^2) / F(x)^2`` of the censored branches.

    Strictly decreasing, valued in (0, 1) on the whole real line.
    """
    scalar = np.isscalar(x) or getattr(x, "ndim", 1) == 0
    r = _mills_lower(x)
    out = np.asarray(x, dtype=float) * r + r * r
    return float(out) if scalar else out


def _classify_saturated(family: Saturated, y: np.ndarray):
    """Split observations into lower-sentinel, upper-sentinel and interior masks."""
    lo = y == family.lout
    hi = y == family.uout
    mid = ~(lo | hi)
    bad = mid & ((y < family.l) | (y > family.u) | ~np.isfinite(y))
    if np.any(bad):
        raise MalformedObservationError(
            "saturated output neither a censor sentinel nor inside "
            f"[{family.l}, {family.u}]: first offender {y[bad].flat[0]!r}"
        )
    return lo, hi, mid


def _prepare(xi, y):
    xi = np.asarray(xi, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = xi.ndim == 0 and y.ndim == 0
    xi, y = np.broadcast_arrays(xi, y)
    return np.atleast_1d(xi), np.atleast_1d(y), scalar


def _check_logistic_outputs(y):
    if np.any((y < 0.0) | (y > 1.0) | ~np.isfinite(y)):
        raise MalformedObservationError("logistic output outside [0, 1]")


def loss_value(family: LossFamily, xi, y):
    """Loss ``L(xi, y)`` for the family, elementwise."""
    xi, y, scalar = _prepare(xi, y)
    if isinstance(family, Linear):
        out = 0.5 * (xi - y) ** 2
    elif isinstance(family, Logistic):
        _check_logistic_outputs(y)
        p = np.clip(sigmoid(xi), _SIGMOID_CLAMP, 1.0 - _SIGMOID_CLAMP)
        out = -y * np.log(p) - (1.0 - y) * np.log(1.0 - p)
    elif isinstance(family, Saturated):
        lo, hi, mid = _classify_saturated(family, y)
        out = np.zeros_like(xi)
        # log F computed in log space; the tails of log_ndtr are exact.
        out[lo] = -special.log_ndtr(family.l - xi[lo])
        out[hi] = -special.log_ndtr(xi[hi] - family.u)
        resid = y[mid] - xi[mid]
        out[mid] = 0.5 * resid**2 + _LOG_SQRT_2PI
    else:
        raise TypeError(f"unknown loss family {family!r}")
    return float(out[0]) if scalar else out


def g1(family: LossFamily, xi, y):
    """First derivative of the loss in the predictor, elementwise."""
    xi, y, scalar = _prepare(xi, y)
    if isinstance(family, Linear):
        out = xi - y
    elif isinstance(family, Logistic):
        _check_logistic_outputs(y)
        out = sigmoid(xi) - y
    elif isinstance(family, Saturated):
        lo, hi, mid = _classify_saturated(family, y)
        out = np.zeros_like(xi)
        out[lo] = _mills_lower(family.l - xi[lo])
        out[hi] = -_mills_lower(xi[hi] - family.u)
        out[mid] = xi[mid] - y[mid]
    else:
        raise TypeError(f"unknown loss family {family!r}")
    return float(out[0]) if scalar else out


def g2(family: LossFamily, xi, y):
    """Second derivative of the loss in the predictor, elementwise."""
    xi, y, scalar = _prepare(xi, y)
    if isinstance(family, Linear):
        out = np.ones_like(xi)
    elif isinstance(family, Logistic):
        _check_logistic_outputs(y)
        p = sigmoid(xi)
        out = p * (1.0 - p)
    elif isinstance(family, Saturated):
        lo, hi, mid = _classify_saturated(family, y)
        out = np.zeros_like(xi)
        out[lo] = saturation_h(family.l - xi[lo])
        out[hi] = saturation_h(xi[hi] - family.u)
        out[mid] = 1.0
    else:
        raise TypeError(f"unknown loss family {family!r}")
    return float(out[0]) if scalar else out


def _grid_min(fn, lo: float, hi: float, step: float = 1e-3) -> float:
    """Dense-grid minimization with one local refinement pass."""
    grid = np.arange(lo, hi + step, step)
    vals = fn(grid)
    k = int(np.argmin(vals))
    best = float(vals[k])
    a = max(lo, float(grid[k]) - step)
    b = min(hi, float(grid[k]) + step)
    fine = np.linspace(a, b, 2001)
    return min(best, float(np.min(fn(fine))))


def curvature_bounds(family: LossFamily, C: float) -> CurvatureBounds:
    """Curvature envelope of ``g2`` over predictors ``|xi| <= C``, worst-case in ``y``.

    Linear and logistic bounds are closed-form.  The saturated lower bound is
    found by grid minimization of each censored branch (the branch kernels are
    strictly decreasing, so the grid search is a guard rather than a necessity).
    """
    C = float(C)
    if not (C >= 0.0 and math.isfinite(C)):
        raise ValueError("predictor bound C must be finite and nonnegative")
    if isinstance(family, Linear):
        return CurvatureBounds(1.0, 1.0, C)
    if isinstance(family, Logistic):
        p = float(sigmoid(C))
        return CurvatureBounds(p * (1.0 - p), 0.25, C)
    if isinstance(family, Saturated):
        lo_branch = _grid_min(lambda t: saturation_h(family.l - t), -C, C)
        hi_branch = _grid_min(lambda t: saturation_h(t - family.u), -C, C)
        return CurvatureBounds(min(lo_branch, hi_branch, 1.0), 1.0, C)
    raise TypeError(f"unknown loss family {family!r}")
