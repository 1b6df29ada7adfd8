"""Experiment harness: strict JSON configs, the task loop, and file outputs.

A run iterates one learner over a task stream in visitation order, keeping
streaming accumulators for the regret and the optimal-loss baselines, and
recomputing the forgetting metric at checkpoint stages from an append-only
evaluation buffer (the learners themselves never revisit old data).  Runs
are bit-reproducible for a fixed config and seed.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import losses, metrics, models, streams
from .algorithms import (
    DIVERGENCE_NORM,
    Alg1Config,
    Alg2Config,
    LearnerState,
    SgdConfig,
    alg1_update,
    alg2_update,
    init_state,
    sgd_update,
)
from .errors import ConfigError
from .metrics import MetricsRecord, RateFit, RegretAccumulator, task_loss_sum
from .numkit import min_eigenvalue

CSV_COLUMNS = ("t", "est_err_sq", "forgetting", "regret", "lambda_min",
               "q_lambda_min", "l_star", "p_star", "learner", "seed")

THREADS_ENV = "CONLEARN_THREADS"

STATUS_COMPLETED = "completed"
STATUS_DIVERGED = "diverged"


# --- configuration ----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    stream: streams.StreamSpec
    learner: object  # Alg1Config | Alg2Config | SgdConfig
    checkpoint_every: Optional[int]
    output_dir: Optional[str]
    replicate_seeds: tuple


def _take(section: dict, path: str, key: str, required: bool = False, default=None):
    if key in section:
        return section.pop(key)
    if required:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return default


def _no_extras(section: dict, path: str) -> None:
    if section:
        raise ConfigError(f"{path}.{sorted(section)[0]}", "unknown field")


def _parse_family(raw, path: str) -> losses.LossFamily:
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object with a 'kind' field")
    raw = dict(raw)
    kind = _take(raw, path, "kind", required=True)
    if kind == "linear":
        _no_extras(raw, path)
        return losses.Linear()
    if kind == "logistic":
        _no_extras(raw, path)
        return losses.Logistic()
    if kind == "saturated":
        fam = losses.Saturated(
            l=float(_take(raw, path, "l", required=True)),
            u=float(_take(raw, path, "u", required=True)),
            lout=float(_take(raw, path, "lout", required=True)),
            uout=float(_take(raw, path, "uout", required=True)),
        )
        _no_extras(raw, path)
        return fam
    raise ConfigError(f"{path}.kind", f"unknown loss family {kind!r}")


def _parse_regime(raw, path: str) -> models.FeatureRegime:
    raw = dict(raw)
    kind = _take(raw, path, "kind", required=True)
    if kind == "bounded_uniform":
        regime = models.BoundedUniform(bound=float(_take(raw, path, "bound", required=True)))
    elif kind == "gaussian_iid":
        cov = _take(raw, path, "covariance", default=1.0)
        regime = models.GaussianIid(covariance=cov if np.isscalar(cov) else np.asarray(cov, float))
    elif kind == "low_excitation":
        regime = models.LowExcitation(
            bound=float(_take(raw, path, "bound", required=True)),
            exponent=float(_take(raw, path, "exponent", required=True)),
            rate=float(_take(raw, path, "rate", default=2.0)),
        )
    else:
        raise ConfigError(f"{path}.kind", f"unknown feature regime {kind!r}")
    _no_extras(raw, path)
    return regime


def _parse_noise(raw, path: str) -> models.NoiseSpec:
    raw = dict(raw)
    kind = _take(raw, path, "kind", required=True)
    if kind == "gaussian":
        noise = models.GaussianNoise(sigma=float(_take(raw, path, "sigma", required=True)))
    elif kind == "uniform":
        noise = models.UniformNoise(halfwidth=float(_take(raw, path, "halfwidth", required=True)))
    elif kind == "student_t":
        noise = models.StudentTNoise(dof=float(_take(raw, path, "dof", required=True)),
                                     scale=float(_take(raw, path, "scale", required=True)))
    elif kind == "bernoulli":
        noise = models.BernoulliOutput()
    else:
        raise ConfigError(f"{path}.kind", f"unknown noise kind {kind!r}")
    _no_extras(raw, path)
    return noise


def _parse_order(raw, path: str) -> streams.OrderSpec:
    if raw is None:
        return streams.Sequential()
    raw = dict(raw)
    kind = _take(raw, path, "kind", required=True)
    if kind == "sequential":
        _no_extras(raw, path)
        return streams.Sequential()
    if kind == "random":
        seed = _take(raw, path, "seed", default=None)
        _no_extras(raw, path)
        return streams.RandomOrder(seed=None if seed is None else int(seed))
    raise ConfigError(f"{path}.kind", f"unknown order kind {kind!r}")


def _parse_stream(raw, path: str = "stream") -> streams.StreamSpec:
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object")
    raw = dict(raw)
    case = int(_take(raw, path, "case", required=True))
    dim = int(_take(raw, path, "dim", required=True))
    num_tasks = int(_take(raw, path, "num_tasks", required=True))
    samples = int(_take(raw, path, "samples_per_task", required=True))
    family = _parse_family(_take(raw, path, "family", required=True), f"{path}.family")
    regime = _parse_regime(_take(raw, path, "regime", required=True), f"{path}.regime")
    noise = _parse_noise(_take(raw, path, "noise", required=True), f"{path}.noise")
    order = _parse_order(_take(raw, path, "order", default=None), f"{path}.order")
    seed = int(_take(raw, path, "seed", required=True))
    w_star = _take(raw, path, "w_star", default=None)
    case2_raw = _take(raw, path, "case2", default=None)
    _no_extras(raw, path)

    case2 = None
    if case2_raw is not None:
        case2_raw = dict(case2_raw)
        metas = _take(case2_raw, f"{path}.case2", "metas", required=True)
        sigma = float(_take(case2_raw, f"{path}.case2", "perturbation_sigma", required=True))
        assignment = _take(case2_raw, f"{path}.case2", "assignment",
                           default=streams.ASSIGNMENT_BLOCKED)
        _no_extras(case2_raw, f"{path}.case2")
        case2 = streams.Case2Meta(metas=tuple(tuple(map(float, m)) for m in metas),
                                  perturbation_sigma=sigma, assignment=assignment)
    try:
        return streams.StreamSpec(case=case, dim=dim, num_tasks=num_tasks,
                                  samples_per_task=samples, family=family, regime=regime,
                                  noise=noise, seed=seed,
                                  w_star=None if w_star is None else np.asarray(w_star, float),
                                  case2=case2, order=order)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _feature_norm_bound(regime: models.FeatureRegime) -> Optional[float]:
    if isinstance(regime, (models.BoundedUniform, models.LowExcitation)):
        return regime.bound
    return None


def _target_norm_bound(spec: streams.StreamSpec) -> float:
    if spec.case == 1:
        return float(np.linalg.norm(spec.w_star))
    meta_norm = max(float(np.linalg.norm(m)) for m in spec.case2.metas)
    return meta_norm + 5.0 * spec.case2.perturbation_sigma * math.sqrt(spec.dim)


def _resolve_alg1(raw: dict, path: str, spec: streams.StreamSpec) -> Alg1Config:
    mu = _take(raw, path, "mu", default=None)
    radius = _take(raw, path, "radius", default=None)
    _no_extras(raw, path)
    if radius is None:
        radius = 10.0 * max(_target_norm_bound(spec), 1e-12)
    radius = float(radius)
    if mu is None:
        if isinstance(spec.family, losses.Linear):
            mu = 1.0
        else:
            L = _feature_norm_bound(spec.regime)
            if L is None:
                raise ConfigError(f"{path}.mu",
                                  "explicit mu required for unbounded feature regimes")
            mu = math.sqrt(losses.curvature_bounds(spec.family, L * radius).mu_lower)
    try:
        return Alg1Config(family=spec.family, mu=float(mu), radius=radius)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_learner(raw, path: str, spec: streams.StreamSpec):
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object with a 'kind' field")
    raw = dict(raw)
    kind = _take(raw, path, "kind", required=True)
    if kind == "alg1":
        return _resolve_alg1(raw, path, spec)
    if kind == "alg2":
        if not isinstance(spec.family, losses.Linear):
            raise ConfigError(path, "the gain-scheduled learner requires the linear family")
        delta = float(_take(raw, path, "delta", default=0.0))
        betas = _take(raw, path, "betas", default=None)
        _no_extras(raw, path)
        try:
            return Alg2Config(delta=delta, betas=None if betas is None else tuple(betas))
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from exc
    if kind == "sgd":
        lr = float(_take(raw, path, "lr", default=0.01))
        passes = int(_take(raw, path, "passes", default=5))
        _no_extras(raw, path)
        try:
            return SgdConfig(family=spec.family, lr=lr, passes=passes)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown learner kind {kind!r}")


def parse_config(raw: dict) -> ExperimentConfig:
    """Parse and validate a raw config mapping; unknown keys are errors."""
    if not isinstance(raw, dict):
        raise ConfigError("", "top-level config must be an object")
    raw = dict(raw)
    stream_spec = _parse_stream(_take(raw, "", "stream", required=True))
    learner = _parse_learner(_take(raw, "", "learner", required=True), "learner", stream_spec)
    check_raw = _take(raw, "", "checkpoints", default=None)
    every = None
    if check_raw is not None:
        check_raw = dict(check_raw)
        every = _take(check_raw, "checkpoints", "every", default=None)
        _no_extras(check_raw, "checkpoints")
        if every is not None:
            every = int(every)
            if every < 1:
                raise ConfigError("checkpoints.every", "must be a positive integer")
    out_raw = _take(raw, "", "output", default=None)
    output_dir = None
    if out_raw is not None:
        out_raw = dict(out_raw)
        output_dir = _take(out_raw, "output", "dir", default=None)
        _no_extras(out_raw, "output")
    seeds = _take(raw, "", "replicate_seeds", default=None)
    _no_extras(raw, "")
    if seeds is None:
        seeds = (stream_spec.seed,)
    else:
        seeds = tuple(int(s) for s in seeds)
        if not seeds:
            raise ConfigError("replicate_seeds", "must be nonempty when given")
    return ExperimentConfig(stream=stream_spec, learner=learner, checkpoint_every=every,
                            output_dir=output_dir, replicate_seeds=seeds)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
    return parse_config(raw)


def default_checkpoint_every(num_tasks: int) -> int:
    return 1 if num_tasks <= 200 else math.ceil(num_tasks / 200)


# --- learner drivers --------------------------------------------------------


class _Alg1Driver:
    name = "alg1"

    def __init__(self, cfg: Alg1Config, dim: int):
        self.cfg = cfg
        self.state = init_state(dim)

    @property
    def w(self) -> np.ndarray:
        return self.state.w

    def step(self, task, stage: int) -> None:
        self.state = alg1_update(self.state, task, self.cfg)

    def q_lambda_min(self) -> float:
        return min_eigenvalue(self.state.Q)


class _Alg2Driver:
    name = "alg2"

    def __init__(self, cfg: Alg2Config, dim: int):
        self.cfg = cfg
        self.state = init_state(dim)

    @property
    def w(self) -> np.ndarray:
        return self.state.w

    def step(self, task, stage: int) -> None:
        self.state = alg2_update(self.state, task, self.cfg.beta(stage))

    def q_lambda_min(self) -> float:
        return min_eigenvalue(self.state.Q)


class _SgdDriver:
    name = "sgd"

    def __init__(self, cfg: SgdConfig, dim: int):
        self.cfg = cfg
        self._w = np.zeros(dim)
        self._t = 0

    @property
    def w(self) -> np.ndarray:
        return self._w

    @property
    def state(self) -> LearnerState:
        return LearnerState(w=self._w, Q=np.eye(self._w.shape[0]), t=self._t)

    def step(self, task, stage: int) -> None:
        self._w = sgd_update(self._w, task, self.cfg.family, self.cfg.lr, self.cfg.passes)
        self._t = stage

    def q_lambda_min(self) -> float:
        return float("nan")


def _make_driver(learner, dim: int):
    if isinstance(learner, Alg1Config):
        return _Alg1Driver(learner, dim)
    if isinstance(learner, Alg2Config):
        return _Alg2Driver(learner, dim)
    if isinstance(learner, SgdConfig):
        return _SgdDriver(learner, dim)
    raise TypeError(f"unknown learner config {learner!r}")


# --- the run loop -----------------------------------------------------------


class _EvalBuffer:
    """Append-only store of every seen sample, for forgetting recomputation."""

    def __init__(self, dim: int):
        self._X = np.empty((1024, dim))
        self._y = np.empty(1024)
        self._n = 0

    def append(self, task) -> None:
        need = self._n + task.n
        if need > self._X.shape[0]:
            cap = max(need, 2 * self._X.shape[0])
            X = np.empty((cap, self._X.shape[1]))
            y = np.empty(cap)
            X[: self._n] = self._X[: self._n]
            y[: self._n] = self._y[: self._n]
            self._X, self._y = X, y
        if task.n:
            self._X[self._n: need] = task.features
            self._y[self._n: need] = task.outputs
        self._n = need

    def loss_sum(self, family, w) -> float:
        if self._n == 0:
            return 0.0
        vals = losses.loss_value(family, self._X[: self._n] @ w, self._y[: self._n])
        return math.fsum(np.atleast_1d(vals).tolist())


@dataclass(frozen=True)
class RunResult:
    records: tuple
    final_state: LearnerState
    rate_fits: dict
    skipped_fits: dict
    status: str
    seed: int
    target: np.ndarray
    trajectory: tuple  # (t, w) pairs at checkpoint stages
    learner_name: str


def _checkpoints(num_tasks: int, every: Optional[int]) -> set:
    step = every if every is not None else default_checkpoint_every(num_tasks)
    points = set(range(step, num_tasks + 1, step))
    points.add(num_tasks)
    return points


def _rate_series(records: Sequence[MetricsRecord]):
    stages = np.array([r.t for r in records], dtype=float)
    return {
        "est_err_sq": (stages, np.array([r.est_err_sq for r in records])),
        "regret_gap": (stages, np.array([r.regret - r.l_star for r in records])),
        "forgetting_gap": (stages, np.array([r.forgetting - r.l_star for r in records])),
        "lambda_min": (stages, np.array([r.lambda_min for r in records])),
    }


def run_experiment(cfg: ExperimentConfig, seed: Optional[int] = None) -> RunResult:
    """Run one replicate and return its records, fits and final state."""
    spec = cfg.stream if seed is None else replace(cfg.stream, seed=seed)
    if isinstance(spec.order, streams.RandomOrder) and spec.order.seed is None:
        spec = replace(spec, order=streams.RandomOrder(seed=spec.seed))
    stream = streams.build_stream(spec)
    family = spec.family
    target = stream.w_star

    driver = _make_driver(cfg.learner, spec.dim)
    regret = RegretAccumulator(family)
    gram = metrics.GramAccumulator(spec.dim)
    buffer = _EvalBuffer(spec.dim)
    checkpoints = _checkpoints(spec.num_tasks, cfg.checkpoint_every)

    l_star_sum = 0.0
    p_star_sum = 0.0
    diverged = False
    records = []
    trajectory = []

    for stage, task in enumerate(stream.tasks, start=1):
        regret.observe(stage, driver.w, task)
        l_star_sum += task_loss_sum(family, target, task)
        p_star_sum += task_loss_sum(family, task.w_true, task)
        driver.step(task, stage)
        gram.add_task(task)
        buffer.append(task)
        if float(np.linalg.norm(driver.w)) > DIVERGENCE_NORM:
            diverged = True
        if stage in checkpoints:
            w_now = driver.w
            records.append(MetricsRecord(
                t=stage,
                est_err_sq=float(np.sum((w_now - target) ** 2)),
                forgetting=buffer.loss_sum(family, w_now) / stage,
                regret=regret.value,
                lambda_min=gram.value(),
                l_star=l_star_sum / stage,
                p_star=p_star_sum / stage,
                q_lambda_min=driver.q_lambda_min(),
            ))
            trajectory.append((stage, w_now.copy()))

    rate_fits, skipped = {}, {}
    for name, (stages_arr, values) in _rate_series(records).items():
        try:
            rate_fits[name] = metrics.rate_fit(stages_arr, values)
        except ValueError as exc:
            skipped[name] = str(exc)

    return RunResult(records=tuple(records), final_state=driver.state,
                     rate_fits=rate_fits, skipped_fits=skipped,
                     status=STATUS_DIVERGED if diverged else STATUS_COMPLETED,
                     seed=spec.seed, target=target, trajectory=tuple(trajectory),
                     learner_name=driver.name)


def _thread_cap(n_jobs: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(THREADS_ENV, f"not an integer: {env!r}") from exc
        if cap < 1:
            raise ConfigError(THREADS_ENV, "must be >= 1")
        return min(n_jobs, cap)
    return min(n_jobs, os.cpu_count() or 1)


def run_config(cfg: ExperimentConfig) -> list:
    """Run all replicates (parallelism capped by CONLEARN_THREADS), write outputs."""
    seeds = cfg.replicate_seeds
    workers = _thread_cap(len(seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: run_experiment(cfg, seed=s), seeds))
    else:
        results = [run_experiment(cfg, seed=s) for s in seeds]
    if cfg.output_dir is not None:
        write_outputs(cfg, results, cfg.output_dir)
    return results


# --- file outputs -----------------------------------------------------------


def format_float(x: float) -> str:
    """17-significant-digit rendering; round-trips float64 exactly."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def metrics_csv_lines(result: RunResult) -> list:
    lines = [",".join(CSV_COLUMNS)]
    for r in result.records:
        lines.append(",".join([
            str(r.t),
            format_float(r.est_err_sq),
            format_float(r.forgetting),
            format_float(r.regret),
            format_float(r.lambda_min),
            format_float(r.q_lambda_min),
            format_float(r.l_star),
            format_float(r.p_star),
            result.learner_name,
            str(result.seed),
        ]))
    return lines


def trajectory_csv_lines(result: RunResult) -> list:
    dim = result.target.shape[0]
    lines = [",".join(["t"] + [f"w{i + 1}" for i in range(dim)])]
    for t, w in result.trajectory:
        lines.append(",".join([str(t)] + [format_float(v) for v in w]))
    return lines


def config_to_dict(cfg: ExperimentConfig) -> dict:
    spec = cfg.stream
    fam = spec.family
    if isinstance(fam, losses.Linear):
        fam_d = {"kind": "linear"}
    elif isinstance(fam, losses.Logistic):
        fam_d = {"kind": "logistic"}
    else:
        fam_d = {"kind": "saturated", "l": fam.l, "u": fam.u, "lout": fam.lout, "uout": fam.uout}
    regime = spec.regime
    if isinstance(regime, models.BoundedUniform):
        reg_d = {"kind": "bounded_uniform", "bound": regime.bound}
    elif isinstance(regime, models.GaussianIid):
        cov = regime.covariance
        reg_d = {"kind": "gaussian_iid",
                 "covariance": cov if np.isscalar(cov) else np.asarray(cov).tolist()}
    else:
        reg_d = {"kind": "low_excitation", "bound": regime.bound,
                 "exponent": regime.exponent, "rate": regime.rate}
    noise = spec.noise
    if isinstance(noise, models.GaussianNoise):
        noise_d = {"kind": "gaussian", "sigma": noise.sigma}
    elif isinstance(noise, models.UniformNoise):
        noise_d = {"kind": "uniform", "halfwidth": noise.halfwidth}
    elif isinstance(noise, models.StudentTNoise):
        noise_d = {"kind": "student_t", "dof": noise.dof, "scale": noise.scale}
    else:
        noise_d = {"kind": "bernoulli"}
    order = spec.order
    order_d = ({"kind": "sequential"} if isinstance(order, streams.Sequential)
               else {"kind": "random", "seed": order.seed})
    stream_d = {
        "case": spec.case, "dim": spec.dim, "num_tasks": spec.num_tasks,
        "samples_per_task": spec.samples_per_task, "family": fam_d, "regime": reg_d,
        "noise": noise_d, "order": order_d, "seed": spec.seed,
    }
    if spec.case == 1:
        stream_d["w_star"] = np.asarray(spec.w_star).tolist()
    else:
        stream_d["case2"] = {
            "metas": [np.asarray(m).tolist() for m in spec.case2.metas],
            "perturbation_sigma": spec.case2.perturbation_sigma,
            "assignment": spec.case2.assignment,
        }
    learner = cfg.learner
    if isinstance(learner, Alg1Config):
        learner_d = {"kind": "alg1", "mu": learner.mu, "radius": learner.radius}
    elif isinstance(learner, Alg2Config):
        learner_d = {"kind": "alg2", "delta": learner.delta,
                     "betas": None if learner.betas is None else list(learner.betas)}
    else:
        learner_d = {"kind": "sgd", "lr": learner.lr, "passes": learner.passes}
    return {
        "stream": stream_d,
        "learner": learner_d,
        "checkpoints": {"every": cfg.checkpoint_every},
        "output": {"dir": cfg.output_dir},
        "replicate_seeds": list(cfg.replicate_seeds),
    }


def _fit_to_dict(fit: RateFit) -> dict:
    return {"exponent": fit.exponent, "intercept": fit.intercept,
            "r_squared": fit.r_squared, "window": list(fit.window)}


def result_summary(result: RunResult) -> dict:
    final = result.records[-1]
    return {
        "seed": result.seed,
        "status": result.status,
        "learner": result.learner_name,
        "final_stage": final.t,
        "final_est_err_sq": final.est_err_sq,
        "final_distance_to_target": math.sqrt(final.est_err_sq),
        "final_w": np.asarray(result.final_state.w).tolist(),
        "target": np.asarray(result.target).tolist(),
        "final_metrics": {
            "forgetting": final.forgetting,
            "regret": final.regret,
            "l_star": final.l_star,
            "p_star": final.p_star,
            "lambda_min": final.lambda_min,
        },
        "rate_fits": {k: _fit_to_dict(v) for k, v in sorted(result.rate_fits.items())},
        "skipped_fits": dict(sorted(result.skipped_fits.items())),
    }


def _aggregate(results: Sequence[RunResult]) -> dict:
    exps = {}
    for r in results:
        for name, fit in r.rate_fits.items():
            exps.setdefault(name, []).append(fit.exponent)
    return {
        "median_final_est_err_sq": float(np.median([r.records[-1].est_err_sq for r in results])),
        "median_rate_exponents": {k: float(np.median(v)) for k, v in sorted(exps.items())},
        "statuses": sorted({r.status for r in results}),
    }


def write_outputs(cfg: ExperimentConfig, results: Sequence[RunResult], outdir) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for result in results:
        (out / f"metrics_{result.seed}.csv").write_text(
            "\n".join(metrics_csv_lines(result)) + "\n", encoding="utf-8")
        (out / f"trajectory_{result.seed}.csv").write_text(
            "\n".join(trajectory_csv_lines(result)) + "\n", encoding="utf-8")
    stream_info = {
        "case": cfg.stream.case,
        "dim": cfg.stream.dim,
        "target": np.asarray(results[0].target).tolist(),
    }
    if cfg.stream.case == 2:
        stream_info["meta_parameters"] = [np.asarray(m).tolist()
                                          for m in cfg.stream.case2.metas]
    summary = {
        "stream": stream_info,
        "replicates": [result_summary(r) for r in results],
        "aggregate": _aggregate(results),
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out / "config_echo.json").write_text(
        json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_metrics_csv(path) -> list:
    """Parse a metrics CSV back into records, validating the exact schema."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ConfigError(str(path), "empty metrics CSV")
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        for i, (got, want) in enumerate(zip(header, CSV_COLUMNS)):
            if got != want:
                raise ConfigError(f"{path}:column {i + 1}",
                                  f"expected column {want!r}, found {got!r}")
        raise ConfigError(str(path), f"expected {len(CSV_COLUMNS)} columns, found {len(header)}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ConfigError(f"{path}:{lineno}", "wrong number of columns")
        records.append(MetricsRecord(
            t=int(parts[0]), est_err_sq=float(parts[1]), forgetting=float(parts[2]),
            regret=float(parts[3]), lambda_min=float(parts[4]), q_lambda_min=float(parts[5]),
            l_star=float(parts[6]), p_star=float(parts[7])))
    return records


# --- the reference demonstration stream --------------------------------------

DEMO_METAS = ((4.0, 2.0), (5.5, -1.5), (3.0, -1.0))
DEMO_ROUNDED_REFERENCE = (4.0, -1.0 / 6.0)
DEMO_PERTURBATION_VAR = 0.5
DEMO_NOISE_VAR = 0.2
DEMO_NUM_TASKS = 100
DEMO_SAMPLES = 200


def demo_stream_spec(order: str, seed: int) -> streams.StreamSpec:
    """The two-dimensional three-group demo stream (100 tasks x 200 samples)."""
    if order == "sequential":
        order_spec = streams.Sequential()
    elif order == "random":
        order_spec = streams.RandomOrder(seed=seed)
    else:
        raise ConfigError("order", f"unknown order {order!r}")
    return streams.StreamSpec(
        case=2, dim=2, num_tasks=DEMO_NUM_TASKS, samples_per_task=DEMO_SAMPLES,
        family=losses.Linear(), regime=models.GaussianIid(1.0),
        noise=models.GaussianNoise(math.sqrt(DEMO_NOISE_VAR)), seed=seed,
        case2=streams.Case2Meta(metas=DEMO_METAS,
                                perturbation_sigma=math.sqrt(DEMO_PERTURBATION_VAR),
                                assignment=streams.ASSIGNMENT_BLOCKED),
        order=order_spec)


def demo_config(order: str, learner: str, seed: int,
                output_dir: Optional[str] = None) -> ExperimentConfig:
    spec = demo_stream_spec(order, seed)
    if learner == "alg2":
        learner_cfg = Alg2Config(delta=0.0)
    elif learner == "sgd":
        learner_cfg = SgdConfig(family=losses.Linear(), lr=0.01, passes=5)
    else:
        raise ConfigError("learner", f"unknown demo learner {learner!r}")
    return ExperimentConfig(stream=spec, learner=learner_cfg, checkpoint_every=1,
                            output_dir=output_dir, replicate_seeds=(seed,))
