"""Synthetic single-task data generation.

A task is a finite batch of (feature, output) pairs drawn under a feature
regime and a noise specification, with outputs produced by the generative
rule of the chosen loss family.  Generation is a pure function of the
substream key, so tasks can be built concurrently and in any order and a
given task index always yields bit-identical data.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import losses
from .errors import ConfigError

_SATURATED_NOISE_SIGMA = 1.0


@dataclass(frozen=True)
class TaskData:
    """One task's batch: features (n, d), outputs (n,), generating parameter (d,)."""

    features: np.ndarray
    outputs: np.ndarray
    w_true: np.ndarray

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        y = np.array(self.outputs, dtype=float)
        w = np.array(self.w_true, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"features must be (n, d), got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError("features and outputs must have equal length")
        if w.shape != (X.shape[1],):
            raise ValueError("w_true dimension must match features")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
            raise ValueError("task data contains non-finite entries")
        for arr in (X, y, w):
            arr.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "outputs", y)
        object.__setattr__(self, "w_true", w)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


# --- noise specifications -------------------------------------------------


@dataclass(frozen=True)
class GaussianNoise:
    sigma: float


@dataclass(frozen=True)
class UniformNoise:
    halfwidth: float


@dataclass(frozen=True)
class StudentTNoise:
    dof: float
    scale: float

    def __post_init__(self):
        if not self.dof > 2.0:
            raise ValueError("Student-t noise needs dof > 2 for a finite (2+eps)-moment")


@dataclass(frozen=True)
class BernoulliOutput:
    """Logistic-family outputs drawn as Bernoulli(sigmoid); noise is y - mean."""


NoiseSpec = Union[GaussianNoise, UniformNoise, StudentTNoise, BernoulliOutput]


# --- feature regimes --------------------------------------------------------


@dataclass(frozen=True)
class BoundedUniform:
    """Features uniform in the open Euclidean ball of radius ``bound``."""

    bound: float


@dataclass(frozen=True)
class GaussianIid:
    """Features i.i.d. Gaussian; ``covariance`` is a scalar or a (d, d) matrix."""

    covariance: object = 1.0


@dataclass(frozen=True)
class LowExcitation:
    """Deliberately information-starved stream.

    Every sample points along the first coordinate axis at norm ``bound / 2``.
    On task ``t`` a coin with probability ``min(1, rate * t**(exponent - 1))``
    additionally reveals the remaining coordinate directions, so the smallest
    eigenvalue of the accumulated Gram matrix grows like ``t**exponent``:
    well above ``log t`` but far below the linear growth persistent
    excitation would give.
    """

    bound: float
    exponent: float
    rate: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.exponent < 1.0:
            raise ValueError("excitation exponent must lie in (0, 1)")


FeatureRegime = Union[BoundedUniform, GaussianIid, LowExcitation]


def substream(key) -> np.random.Generator:
    """Deterministic generator for a hashable integer key tuple."""
    if isinstance(key, (int, np.integer)):
        key = (int(key),)
    return np.random.default_rng(np.random.SeedSequence(tuple(int(k) for k in key)))


def _draw_features(regime: FeatureRegime, n: int, dim: int, task_index: int,
                   rng: np.random.Generator) -> np.ndarray:
    if isinstance(regime, BoundedUniform):
        raw = rng.standard_normal((n, dim))
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        radii = regime.bound * rng.random((n, 1)) ** (1.0 / dim)
        return raw / norms * radii
    if isinstance(regime, GaussianIid):
        raw = rng.standard_normal((n, dim))
        cov = regime.covariance
        if np.isscalar(cov):
            return raw * np.sqrt(float(cov))
        cov = np.asarray(cov, dtype=float)
        if cov.shape != (dim, dim):
            raise ValueError(f"covariance shape {cov.shape} does not match dim {dim}")
        return raw @ np.linalg.cholesky(cov).T
    if isinstance(regime, LowExcitation):
        X = np.zeros((n, dim))
        X[:, 0] = regime.bound / 2.0
        t = task_index + 1
        fire = rng.random() < min(1.0, regime.rate * t ** (regime.exponent - 1.0))
        if fire and dim > 1:
            k = min(n, dim - 1)
            offset = task_index % (dim - 1)
            for row in range(k):
                j = 1 + (offset + row) % (dim - 1)
                X[row, :] = 0.0
                X[row, j] = regime.bound / 2.0
        return X
    raise TypeError(f"unknown feature regime {regime!r}")


def _draw_noise(noise: NoiseSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(noise, GaussianNoise):
        return noise.sigma * rng.standard_normal(n)
    if isinstance(noise, UniformNoise):
        return rng.uniform(-noise.halfwidth, noise.halfwidth, n)
    if isinstance(noise, StudentTNoise):
        return noise.scale * rng.standard_t(noise.dof, n)
    raise TypeError(f"unknown noise spec {noise!r}")


def generate_task(family: losses.LossFamily, w_true, n: int, regime: FeatureRegime,
                  noise: NoiseSpec, key, task_index: int = 0) -> TaskData:
    """Generate one task's batch under the family's generative rule.

    ``key`` is the substream key (any tuple of ints); two calls with equal
    arguments return bit-identical data.
    """
    w_true = np.asarray(w_true, dtype=float)
    if w_true.ndim != 1:
        raise ValueError("w_true must be a vector")
    if n < 0:
        raise ValueError("sample count must be nonnegative")
    dim = w_true.shape[0]
    rng = substream(key)
    X = _draw_features(regime, n, dim, task_index, rng)
    pred = X @ w_true

    if isinstance(family, losses.Linear):
        y = pred + _draw_noise(noise, n, rng)
    elif isinstance(family, losses.Logistic):
        mean = losses.sigmoid(pred)
        if isinstance(noise, BernoulliOutput):
            y = (rng.random(n) < mean).astype(float)
        else:
            y = np.clip(mean + _draw_noise(noise, n, rng), 0.0, 1.0)
    elif isinstance(family, losses.Saturated):
        if not (isinstance(noise, GaussianNoise) and noise.sigma == _SATURATED_NOISE_SIGMA):
            raise ConfigError(
                "noise", "the saturated family requires gaussian noise with sigma = 1"
            )
        s = pred + rng.standard_normal(n)
        y = s.copy()
        y[s >= family.u] = family.uout
        y[s <= family.l] = family.lout
    else:
        raise TypeError(f"unknown loss family {family!r}")
    return TaskData(features=X, outputs=y, w_true=w_true)


def moment_check(samples, order: float) -> float:
    """Empirical absolute moment ``mean(|s|**order)`` of a nonempty sample."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("moment_check requires a nonempty sample")
    if not order > 0:
        raise ValueError("moment order must be positive")
    return float(np.mean(np.abs(samples) ** order))
