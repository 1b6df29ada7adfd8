"""Task-stream assembly for the two continual-learning regimes.

Case 1 streams share a single generating parameter across all tasks.  Case 2
streams draw each task's parameter from a small set of meta parameters plus a
Gaussian perturbation, so only an approximate common target exists.  Task
data is keyed by the task's original index: visiting the same stream in a
different order reuses identical task batches.
"""

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from . import losses, models
from .errors import ConfigError

ASSIGNMENT_BLOCKED = "blocked"
ASSIGNMENT_UNIFORM = "uniform"

# Substream tags: parameter draws, task data, group assignment.
_PARAM_TAG = 0
_DATA_TAG = 1
_ASSIGN_TAG = 2


@dataclass(frozen=True)
class Sequential:
    pass


@dataclass(frozen=True)
class RandomOrder:
    seed: int


OrderSpec = Union[Sequential, RandomOrder]


@dataclass(frozen=True)
class Case2Meta:
    """Meta parameters (k, d), perturbation scale, and the task-to-group rule.

    ``blocked`` assignment splits the task indices into contiguous,
    near-equal groups (matching a stream that moves through regimes one at a
    time); ``uniform`` draws each task's group independently at random, which
    makes the per-task drift i.i.d. zero-mean around the meta average.
    """

    metas: tuple
    perturbation_sigma: float
    assignment: str = ASSIGNMENT_BLOCKED

    def __post_init__(self):
        metas = tuple(np.asarray(m, dtype=float) for m in self.metas)
        if len(metas) == 0:
            raise ConfigError("stream.case2.metas", "case 2 requires at least one meta parameter")
        dims = {m.shape for m in metas}
        if len(dims) != 1 or metas[0].ndim != 1:
            raise ConfigError("stream.case2.metas", "meta parameters must be vectors of equal length")
        for m in metas:
            m.setflags(write=False)
        if self.assignment not in (ASSIGNMENT_BLOCKED, ASSIGNMENT_UNIFORM):
            raise ConfigError("stream.case2.assignment",
                              f"unknown assignment rule {self.assignment!r}")
        if self.perturbation_sigma < 0:
            raise ConfigError("stream.case2.perturbation_sigma", "must be nonnegative")
        object.__setattr__(self, "metas", metas)


@dataclass(frozen=True)
class StreamSpec:
    case: int
    dim: int
    num_tasks: int
    samples_per_task: int
    family: losses.LossFamily
    regime: models.FeatureRegime
    noise: models.NoiseSpec
    seed: int
    w_star: Optional[np.ndarray] = None
    case2: Optional[Case2Meta] = None
    order: OrderSpec = Sequential()

    def __post_init__(self):
        if self.case not in (1, 2):
            raise ConfigError("stream.case", f"case must be 1 or 2, got {self.case}")
        if self.num_tasks < 1:
            raise ConfigError("stream.num_tasks", "need at least one task")
        if self.samples_per_task < 0:
            raise ConfigError("stream.samples_per_task", "must be nonnegative")
        if self.case == 1:
            if self.w_star is None:
                raise ConfigError("stream.w_star", "case 1 requires the shared parameter")
            w = np.asarray(self.w_star, dtype=float)
            if w.shape != (self.dim,):
                raise ConfigError("stream.w_star", f"expected shape ({self.dim},), got {w.shape}")
            w.setflags(write=False)
            object.__setattr__(self, "w_star", w)
        else:
            if self.case2 is None:
                raise ConfigError("stream.case2", "case 2 requires meta parameters")
            if self.case2.metas[0].shape != (self.dim,):
                raise ConfigError("stream.case2.metas", "meta dimension does not match stream dim")


@dataclass(frozen=True)
class TaskStream:
    """Tasks in visitation order plus the construction-time target."""

    tasks: tuple
    w_star: np.ndarray
    per_task_w: np.ndarray   # (m, d), aligned with the visitation order
    groups: Optional[np.ndarray]  # case 2 group ids, aligned; None for case 1
    spec: StreamSpec


def effective_target(stream_or_spec) -> np.ndarray:
    """The fixed target the estimators are measured against.

    Case 1: the shared generating parameter.  Case 2: the expectation of the
    per-task parameter distribution, i.e. the plain average of the meta
    parameters (the perturbation has mean zero).
    """
    spec = stream_or_spec.spec if isinstance(stream_or_spec, TaskStream) else stream_or_spec
    if spec.case == 1:
        return np.asarray(spec.w_star, dtype=float)
    return np.mean(np.stack(spec.case2.metas), axis=0)


def _group_assignment(spec: StreamSpec) -> np.ndarray:
    m = spec.num_tasks
    k = len(spec.case2.metas)
    if spec.case2.assignment == ASSIGNMENT_BLOCKED:
        return (np.arange(m) * k) // m
    rng = models.substream((spec.seed, _ASSIGN_TAG))
    return rng.integers(0, k, size=m)


def build_stream(spec: StreamSpec) -> TaskStream:
    """Materialize every task of the stream and apply the visitation order."""
    m, d = spec.num_tasks, spec.dim
    if spec.case == 1:
        per_task_w = np.tile(np.asarray(spec.w_star, dtype=float), (m, 1))
        groups = None
    else:
        groups = _group_assignment(spec)
        metas = np.stack(spec.case2.metas)
        per_task_w = metas[groups].astype(float)
        sigma = spec.case2.perturbation_sigma
        if sigma > 0:
            for t in range(m):
                rng = models.substream((spec.seed, _PARAM_TAG, t))
                per_task_w[t] += sigma * rng.standard_normal(d)

    tasks = [
        models.generate_task(spec.family, per_task_w[t], spec.samples_per_task,
                             spec.regime, spec.noise, key=(spec.seed, _DATA_TAG, t),
                             task_index=t)
        for t in range(m)
    ]

    order = _visitation_order(spec, groups)
    tasks = tuple(tasks[i] for i in order)
    per_task_w = per_task_w[order]
    groups = groups[order] if groups is not None else None
    per_task_w.setflags(write=False)
    return TaskStream(tasks=tasks, w_star=effective_target(spec), per_task_w=per_task_w,
                      groups=groups, spec=spec)


def _visitation_order(spec: StreamSpec, groups) -> np.ndarray:
    m = spec.num_tasks
    if isinstance(spec.order, RandomOrder):
        perm = np.random.default_rng(spec.order.seed).permutation(m)
        return perm
    # Sequential: case 2 visits the meta groups one after another.
    if spec.case == 2:
        return np.lexsort((np.arange(m), groups))
    return np.arange(m)


def with_order(spec: StreamSpec, order: OrderSpec) -> StreamSpec:
    """Same stream (same task data), different visitation order."""
    return replace(spec, order=order)
