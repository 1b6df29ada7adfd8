"""The three learners sharing a per-task update interface.

* ``alg1_update`` — projected, information-weighted one-step update for
  nonlinear families sharing a global minimizer.  The information matrix
  accumulates ``mu^2 * sum x x^T`` per task; the parameter step solves against
  the *updated* matrix and is projected onto the Euclidean ball of radius
  ``M`` in the Q-weighted metric.
* ``alg2_update`` — gain-scheduled recursive least squares for linear
  streams whose per-task optima drift around a fixed center.
* ``sgd_update`` — plain per-sample fine-tuning, the forgetting-prone
  baseline.

Per-task sums use exactly rounded accumulation, so permuting the samples
inside a task leaves every update bit-identical.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import losses
from .errors import MalformedObservationError, NumericalDegeneracyError
from .models import TaskData
from .numkit import exact_colsum, exact_gram, solve_spd

DIVERGENCE_NORM = 1e8

_PROJ_NORM_TOL = 1e-10
_PROJ_WIDTH_TOL = 1e-12
_PROJ_MAX_ITER = 400


@dataclass(frozen=True)
class LearnerState:
    """Estimate, accumulated information matrix, and stage counter."""

    w: np.ndarray
    Q: np.ndarray
    t: int = 0

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        Q = np.array(self.Q, dtype=float)
        if w.ndim != 1 or Q.shape != (w.shape[0], w.shape[0]):
            raise ValueError("state shapes inconsistent")
        w.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "Q", Q)

    @property
    def dim(self) -> int:
        return self.w.shape[0]


def init_state(dim: int, w0=None) -> LearnerState:
    """Fresh state: ``w0`` (zeros by default) and identity information matrix."""
    w = np.zeros(dim) if w0 is None else np.asarray(w0, dtype=float)
    return LearnerState(w=w, Q=np.eye(dim), t=0)


@dataclass(frozen=True)
class Alg1Config:
    family: losses.LossFamily
    mu: float
    radius: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("adaptation gain mu must be positive")
        if not self.radius > 0:
            raise ValueError("projection radius must be positive")


@dataclass(frozen=True)
class Alg2Config:
    delta: float = 0.0
    betas: Optional[tuple] = None

    def __post_init__(self):
        if not (0.0 <= self.delta < 0.5):
            raise ValueError("delta must lie in [0, 1/2)")
        if self.betas is not None:
            betas = tuple(float(b) for b in self.betas)
            if any(b <= 0 for b in betas):
                raise ValueError("explicit task weights must be positive")
            object.__setattr__(self, "betas", betas)

    def beta(self, t: int) -> float:
        if self.betas is not None:
            return self.betas[t - 1]
        return beta_schedule(t, self.delta)


@dataclass(frozen=True)
class SgdConfig:
    family: losses.LossFamily
    lr: float = 0.01
    passes: int = 5

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError("learning rate must be nonnegative")
        if self.passes < 1:
            raise ValueError("need at least one pass")


def beta_schedule(t: int, delta: float) -> float:
    """Task weight ``t**(-delta)`` for stage ``t >= 1``."""
    if t < 1:
        raise ValueError("stage index starts at 1")
    if not (0.0 <= delta < 0.5):
        raise ValueError("delta must lie in [0, 1/2)")
    return float(t) ** (-delta)


def _task_score(family, w, task: TaskData) -> np.ndarray:
    """Exactly accumulated ``sum_i g1(x_i^T w, y_i) x_i``."""
    grads = losses.g1(family, task.features @ w, task.outputs)
    grads = np.atleast_1d(grads)
    if not np.all(np.isfinite(grads)):
        raise MalformedObservationError("non-finite loss gradient in task batch")
    return exact_colsum(grads[:, None] * task.features)


def alg1_update(state: LearnerState, task: TaskData, cfg: Alg1Config) -> LearnerState:
    """One projected information-weighted step on a task batch."""
    if task.dim != state.dim:
        raise ValueError("task dimension does not match state")
    if task.n == 0:
        return LearnerState(w=state.w, Q=state.Q, t=state.t + 1)
    Q_new = state.Q + cfg.mu**2 * exact_gram(task.features)
    candidate = state.w - solve_spd(Q_new, _task_score(cfg.family, state.w, task))
    w_new = project_q_ball(candidate, Q_new, cfg.radius)
    return LearnerState(w=w_new, Q=Q_new, t=state.t + 1)


def alg2_update(state: LearnerState, task: TaskData, beta_t: float) -> LearnerState:
    """One gain-weighted least-squares step on a task batch."""
    if task.dim != state.dim:
        raise ValueError("task dimension does not match state")
    if beta_t < 0:
        raise ValueError("task weight must be nonnegative")
    if task.n == 0 or beta_t == 0.0:
        return LearnerState(w=state.w, Q=state.Q, t=state.t + 1)
    Q_new = state.Q + beta_t * exact_gram(task.features)
    resid = task.outputs - task.features @ state.w
    if not np.all(np.isfinite(resid)):
        raise MalformedObservationError("non-finite residual in task batch")
    rhs = beta_t * exact_colsum(resid[:, None] * task.features)
    w_new = state.w + solve_spd(Q_new, rhs)
    return LearnerState(w=w_new, Q=Q_new, t=state.t + 1)


def project_q_ball(x, Q, M: float) -> np.ndarray:
    """Q-metric projection onto the Euclidean ball of radius ``M``.

    Returns ``argmin_{||w|| <= M} (x - w)^T Q (x - w)``.  Interior points are
    returned unchanged; otherwise the KKT solution ``w = (Q + lam I)^{-1} Q x``
    is found by bracketing and bisecting the strictly decreasing norm gap
    ``||w(lam)|| - M`` in ``lam``.
    """
    x = np.asarray(x, dtype=float)
    if M <= 0:
        raise ValueError("projection radius must be positive")
    norm_x = float(np.linalg.norm(x))
    if norm_x <= M:
        return x.copy()
    Q = np.asarray(Q, dtype=float)
    eye = np.eye(Q.shape[0])
    Qx = Q @ x
    tol = _PROJ_NORM_TOL * max(1.0, M)

    def point(lam: float) -> np.ndarray:
        return solve_spd(Q + lam * eye, Qx)

    lo, hi = 0.0, 1.0
    for _ in range(_PROJ_MAX_ITER):
        if np.linalg.norm(point(hi)) < M:
            break
        hi *= 2.0
    else:
        raise NumericalDegeneracyError("projection root bracketing failed")

    best_w, best_gap = None, math.inf
    for _ in range(_PROJ_MAX_ITER):
        mid = 0.5 * (lo + hi)
        w = point(mid)
        gap = float(np.linalg.norm(w)) - M
        if abs(gap) < best_gap:
            best_w, best_gap = w, abs(gap)
        if abs(gap) <= tol or (hi - lo) <= _PROJ_WIDTH_TOL * max(1.0, mid):
            break
        if gap > 0:
            lo = mid
        else:
            hi = mid
    if best_w is None or best_gap > 1e-6 * max(1.0, M):
        raise NumericalDegeneracyError("projection bisection failed to converge")
    w = best_w
    # Snap onto the ball; the move is within the root tolerance.  The nudge
    # loop guards against the rescale rounding a few ulps back outside, which
    # would make a second projection re-run the root search.
    for _ in range(5):
        norm_w = float(np.linalg.norm(w))
        if norm_w <= M:
            break
        w = w * (M / norm_w) * (1.0 - 1e-16)
    return w


def sgd_update(w, task: TaskData, family: losses.LossFamily, lr: float,
               passes: int) -> np.ndarray:
    """Per-sample gradient passes over one task, in sample order.

    Stops early (returning the last finite iterate) once the norm crosses
    the divergence threshold; the caller decides how to flag the run.
    """
    w = np.array(w, dtype=float)
    if lr < 0:
        raise ValueError("learning rate must be nonnegative")
    if passes < 1:
        raise ValueError("need at least one pass")
    if lr == 0.0 or task.n == 0:
        return w
    X, y = task.features, task.outputs
    for _ in range(passes):
        for i in range(task.n):
            step = w - lr * losses.g1(family, float(X[i] @ w), float(y[i])) * X[i]
            if not np.all(np.isfinite(step)):
                return w
            w = step
            if np.linalg.norm(w) > DIVERGENCE_NORM:
                return w
    return w
