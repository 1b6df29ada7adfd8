"""Forgetting, regret, excitation level, optimal-loss baselines and rate fits.

Conventions: the forgetting and regret metrics average over *tasks* (divide
by the stage count ``t``) while each task contributes the sum of its sample
losses.  ``lambda_min`` tracks the smallest eigenvalue of the identity plus
the accumulated feature Gram matrix, the quantity whose growth governs
convergence.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import losses
from .models import TaskData
from .numkit import exact_gram, min_eigenvalue


def task_loss_sum(family: losses.LossFamily, w, task: TaskData) -> float:
    """Sum of the family loss over one task's samples at parameter ``w``."""
    if task.n == 0:
        return 0.0
    vals = losses.loss_value(family, task.features @ np.asarray(w, dtype=float), task.outputs)
    return math.fsum(np.atleast_1d(vals).tolist())


def forgetting(w, seen_tasks: Sequence[TaskData], family: losses.LossFamily) -> float:
    """Average loss of the current estimate over all tasks seen so far."""
    if len(seen_tasks) == 0:
        raise ValueError("forgetting requires at least one seen task")
    return math.fsum(task_loss_sum(family, w, task) for task in seen_tasks) / len(seen_tasks)


class RegretAccumulator:
    """Running average of each task's loss at the estimate held before learning it.

    ``observe`` must be called once per stage, in order, with the stage index
    and the pre-update estimate; the accumulator is append-only and can be
    finalized to guard against late writes.
    """

    def __init__(self, family: losses.LossFamily):
        self.family = family
        self._total = 0.0
        self._stage = 0
        self._final = False

    def observe(self, stage: int, w_prev, task: TaskData) -> float:
        if self._final:
            raise RuntimeError("regret accumulator already finalized")
        if stage != self._stage + 1:
            raise ValueError(f"stage {stage} out of order; expected {self._stage + 1}")
        self._total += task_loss_sum(self.family, w_prev, task)
        self._stage = stage
        return self.value

    def finalize(self) -> float:
        self._final = True
        return self.value

    @property
    def stage(self) -> int:
        return self._stage

    @property
    def value(self) -> float:
        if self._stage == 0:
            raise ValueError("no stages observed yet")
        return self._total / self._stage


class GramAccumulator:
    """Identity-seeded accumulated feature Gram matrix and its smallest eigenvalue."""

    def __init__(self, dim: int):
        self._G = np.eye(dim)

    def add_task(self, task: TaskData) -> None:
        if task.n:
            self._G = self._G + exact_gram(task.features)

    @property
    def matrix(self) -> np.ndarray:
        return self._G.copy()

    def value(self) -> float:
        return min_eigenvalue(self._G)


def lambda_min_accum(tasks: Sequence[TaskData], dim: Optional[int] = None) -> float:
    """Smallest eigenvalue of ``I + sum_t sum_i x x^T`` over the given tasks."""
    if len(tasks) == 0:
        return 1.0
    acc = GramAccumulator(dim if dim is not None else tasks[0].dim)
    for task in tasks:
        acc.add_task(task)
    return acc.value()


def optimal_loss(tasks: Sequence[TaskData], w_ref, family: losses.LossFamily) -> float:
    """Average loss over tasks at a reference parameter.

    ``w_ref`` may be a single vector (shared target) or an (m, d) array with
    one row per task (per-task true parameters).
    """
    if len(tasks) == 0:
        raise ValueError("optimal_loss requires at least one task")
    w_ref = np.asarray(w_ref, dtype=float)
    if w_ref.ndim == 1:
        rows = (w_ref,) * len(tasks)
    else:
        if w_ref.shape[0] != len(tasks):
            raise ValueError("need one reference parameter per task")
        rows = w_ref
    total = math.fsum(task_loss_sum(family, w, task) for w, task in zip(rows, tasks))
    return total / len(tasks)


@dataclass(frozen=True)
class MetricsRecord:
    """One checkpoint row of the experiment log."""

    t: int
    est_err_sq: float
    forgetting: float
    regret: float
    lambda_min: float
    l_star: float
    p_star: float
    q_lambda_min: float


@dataclass(frozen=True)
class RateFit:
    """Log-log least-squares slope of a positive series against the stage index."""

    exponent: float
    intercept: float
    r_squared: float
    window: tuple

    def __post_init__(self):
        if not (0.0 <= self.r_squared <= 1.0 or math.isnan(self.r_squared)):
            raise ValueError("r_squared must lie in [0, 1]")


def rate_fit(stages, values, window: Optional[tuple] = None) -> RateFit:
    """Fit ``log(value) ~ exponent * log(t) + intercept`` over a stage window.

    ``window`` is an inclusive ``(t_lo, t_hi)`` stage range; by default the
    trailing half of the series is used, which keeps early transients out of
    asymptotic slope estimates.  Values inside the window must be positive.
    """
    stages = np.asarray(stages, dtype=float)
    values = np.asarray(values, dtype=float)
    if stages.shape != values.shape or stages.ndim != 1:
        raise ValueError("stages and values must be equal-length vectors")
    if window is None:
        t_lo = stages[-1] / 2.0 if len(stages) else 0.0
        window = (t_lo, float(stages[-1]) if len(stages) else 0.0)
    mask = (stages >= window[0]) & (stages <= window[1])
    t_win, v_win = stages[mask], values[mask]
    if len(t_win) < 5:
        raise ValueError(f"rate window holds {len(t_win)} points; need at least 5")
    if np.any(v_win <= 0) or not np.all(np.isfinite(v_win)):
        raise ValueError("rate fit requires positive finite values in the window")
    lx, ly = np.log(t_win), np.log(v_win)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return RateFit(exponent=float(slope), intercept=float(intercept), r_squared=r2,
                   window=(float(window[0]), float(window[1])))
