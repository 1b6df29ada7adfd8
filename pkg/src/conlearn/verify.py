"""Built-in verification checks: oracle equivalences, invariants, rate trends.

Each check returns a :class:`CheckResult` with expected/actual details, so the
same implementations back both the command-line ``verify`` verb and the
acceptance test suite.  ``quick`` covers the fast oracle and equivalence
checks; ``full`` adds the long-horizon trend and rate checks.
"""

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import harness, losses, metrics, models, streams
from .algorithms import (
    Alg1Config,
    Alg2Config,
    alg1_update,
    alg2_update,
    init_state,
    project_q_ball,
)
from .numkit import exact_gram, q_norm_sq

ACCEPTANCE_SEEDS = (101, 211, 307, 401, 503)

LEVEL_QUICK = "quick"
LEVEL_FULL = "full"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    details: str
    seconds: float


# --- reference stream/learner configurations --------------------------------

CASE1_W_STAR = (0.6, -0.4, 0.3, 0.5, -0.2)


def case1_linear_config(regime: Optional[models.FeatureRegime] = None) -> harness.ExperimentConfig:
    """Shared-minimizer linear stream: d=5, m=5000, n=10, bounded features."""
    spec = streams.StreamSpec(
        case=1, dim=5, num_tasks=5000, samples_per_task=10, family=losses.Linear(),
        regime=regime if regime is not None else models.BoundedUniform(2.0),
        noise=models.GaussianNoise(0.5), seed=ACCEPTANCE_SEEDS[0],
        w_star=np.array(CASE1_W_STAR))
    learner = Alg1Config(family=losses.Linear(), mu=1.0, radius=10.0)
    return harness.ExperimentConfig(stream=spec, learner=learner, checkpoint_every=None,
                                    output_dir=None, replicate_seeds=ACCEPTANCE_SEEDS)


def case1_weak_excitation_config() -> harness.ExperimentConfig:
    return case1_linear_config(regime=models.LowExcitation(bound=2.0, exponent=0.6, rate=2.0))


def case1_family_config(family: losses.LossFamily,
                        noise: models.NoiseSpec) -> harness.ExperimentConfig:
    """Same stream shape as the linear rate check, nonlinear family."""
    radius = 1.5
    mu = math.sqrt(losses.curvature_bounds(family, 2.0 * radius).mu_lower)
    spec = streams.StreamSpec(
        case=1, dim=5, num_tasks=5000, samples_per_task=10, family=family,
        regime=models.BoundedUniform(2.0), noise=noise, seed=ACCEPTANCE_SEEDS[0],
        w_star=np.array(CASE1_W_STAR))
    learner = Alg1Config(family=family, mu=mu, radius=radius)
    return harness.ExperimentConfig(stream=spec, learner=learner, checkpoint_every=None,
                                    output_dir=None, replicate_seeds=ACCEPTANCE_SEEDS)


def case2_config() -> harness.ExperimentConfig:
    """Drifting-parameter linear stream with bounded features and unit gains."""
    spec = streams.StreamSpec(
        case=2, dim=2, num_tasks=5000, samples_per_task=20, family=losses.Linear(),
        regime=models.BoundedUniform(2.0),
        noise=models.GaussianNoise(math.sqrt(harness.DEMO_NOISE_VAR)), seed=ACCEPTANCE_SEEDS[0],
        case2=streams.Case2Meta(metas=harness.DEMO_METAS,
                                perturbation_sigma=math.sqrt(harness.DEMO_PERTURBATION_VAR),
                                assignment=streams.ASSIGNMENT_UNIFORM),
        order=streams.RandomOrder(seed=None))
    return harness.ExperimentConfig(stream=spec, learner=Alg2Config(delta=0.0),
                                    checkpoint_every=None, output_dir=None,
                                    replicate_seeds=ACCEPTANCE_SEEDS)


_RUN_CACHE: dict = {}


def _runs(key: str, cfg_factory: Callable[[], harness.ExperimentConfig]) -> list:
    if key not in _RUN_CACHE:
        cfg = cfg_factory()
        _RUN_CACHE[key] = [harness.run_experiment(cfg, seed=s) for s in cfg.replicate_seeds]
    return _RUN_CACHE[key]


def clear_run_cache() -> None:
    _RUN_CACHE.clear()


# --- derivative correctness ---------------------------------------------------


def sample_admissible(family: losses.LossFamily, n: int, rng: np.random.Generator):
    """Random predictors and structurally admissible outputs for a family."""
    xi = rng.uniform(-5.0, 5.0, n)
    if isinstance(family, losses.Linear):
        y = rng.uniform(-5.0, 5.0, n)
    elif isinstance(family, losses.Logistic):
        y = rng.uniform(0.0, 1.0, n)
    else:
        y = rng.uniform(family.l, family.u, n)
        branch = rng.random(n)
        y[branch < 0.3] = family.lout
        y[branch > 0.7] = family.uout
    return xi, y


def derivative_errors(family: losses.LossFamily, n: int, rng: np.random.Generator,
                      g1_fn=losses.g1, g2_fn=losses.g2, h: float = 1e-5):
    """Max relative error of g1 vs d(loss) and g2 vs d(g1), central differences."""
    xi, y = sample_admissible(family, n, rng)
    fd_g1 = (losses.loss_value(family, xi + h, y) - losses.loss_value(family, xi - h, y)) / (2 * h)
    fd_g2 = (g1_fn(family, xi + h, y) - g1_fn(family, xi - h, y)) / (2 * h)
    a1, a2 = g1_fn(family, xi, y), g2_fn(family, xi, y)

    def rel(a, b):
        return np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8))

    return float(rel(a1, fd_g1)), float(rel(a2, fd_g2))


def check_derivative_correctness(n_points: int = 10_000) -> CheckResult:
    t0 = time.time()
    rng = np.random.default_rng(12345)
    families = [losses.Linear(), losses.Logistic(),
                losses.Saturated(l=-1.0, u=1.0, lout=-1.0, uout=1.0)]
    worst = 0.0
    for fam in families:
        e1, e2 = derivative_errors(fam, n_points, rng)
        worst = max(worst, e1, e2)
    passed = worst <= 1e-5
    return CheckResult("derivative_correctness", passed,
                       f"max relative error {worst:.2e} (limit 1e-5) at {n_points} points "
                       f"per family", time.time() - t0)


# --- oracle equivalences -------------------------------------------------------


def _linear_tasks(num: int, dim: int, n: int, seed: int) -> list:
    w = np.linspace(0.5, -0.5, dim)
    return [models.generate_task(losses.Linear(), w, n, models.BoundedUniform(2.0),
                                 models.GaussianNoise(0.5), key=(seed, t), task_index=t)
            for t in range(num)]


def check_recursive_batch_equivalence() -> CheckResult:
    """Recursion after m tasks equals the one-shot weighted ridge solution."""
    t0 = time.time()
    rng = np.random.default_rng(2024)
    tasks = _linear_tasks(50, 5, 20, seed=77)
    betas = 1.0 - rng.random(len(tasks))  # in (0, 1]
    state = init_state(5)
    A = np.eye(5)
    b = np.zeros(5)
    for task, beta in zip(tasks, betas):
        state = alg2_update(state, task, float(beta))
        A += beta * exact_gram(task.features)
        b += beta * task.features.T @ task.outputs
    w_batch = np.linalg.solve(A, b)
    rel = float(np.linalg.norm(state.w - w_batch) / np.linalg.norm(w_batch))
    return CheckResult("recursive_batch_equivalence", rel <= 1e-8,
                       f"relative gap {rel:.2e} (limit 1e-8) over 50 tasks, random weights",
                       time.time() - t0)


def check_alg1_alg2_equivalence() -> CheckResult:
    """With the linear family, unit gains and a slack radius the learners coincide."""
    t0 = time.time()
    tasks = _linear_tasks(100, 5, 10, seed=88)
    cfg1 = Alg1Config(family=losses.Linear(), mu=1.0, radius=1e6)
    s1, s2 = init_state(5), init_state(5)
    worst = 0.0
    for task in tasks:
        s1 = alg1_update(s1, task, cfg1)
        s2 = alg2_update(s2, task, 1.0)
        worst = max(worst, float(np.max(np.abs(s1.w - s2.w))))
    return CheckResult("alg1_alg2_linear_equivalence", worst <= 1e-10,
                       f"max per-coordinate gap {worst:.2e} (limit 1e-10) over 100 tasks",
                       time.time() - t0)


# --- projection optimality -----------------------------------------------------


def _sphere_grid(dim: int, m: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    if dim == 2:
        theta = np.arange(0.0, 2 * np.pi, 2 * np.pi / m)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    # Fibonacci sphere for d=3.
    k = np.arange(m) + 0.5
    phi = np.arccos(1 - 2 * k / m)
    theta = np.pi * (1 + math.sqrt(5)) * k
    return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi),
                     np.cos(phi)], axis=1)


def grid_projection_qdist(x, Q, M: float, coarse: int = 6000) -> float:
    """Best Q-distance from ``x`` over a dense grid on the radius-M sphere.

    A local refinement pass around the best coarse direction sharpens the
    oracle without a full fine grid.
    """
    dirs = _sphere_grid(len(x), coarse)
    cands = M * dirs
    diff = cands - x
    d2 = np.einsum("ij,jk,ik->i", diff, Q, diff)
    best = int(np.argmin(d2))
    u = dirs[best]
    # Refine: renormalized perturbations of the best direction.
    rng = np.random.default_rng(0)
    scales = np.concatenate([np.full(400, 1e-3), np.full(400, 1e-4)])
    pert = u + scales[:, None] * rng.standard_normal((800, len(x)))
    pert /= np.linalg.norm(pert, axis=1, keepdims=True)
    cands = M * np.vstack([dirs[best][None, :], pert])
    diff = cands - x
    d2f = np.einsum("ij,jk,ik->i", diff, Q, diff)
    return float(min(d2.min(), d2f.min()))


def check_projection_optimality(n_instances: int = 1000) -> CheckResult:
    t0 = time.time()
    rng = np.random.default_rng(99)
    worst_slack = -math.inf
    worst_norm_excess = -math.inf
    for i in range(n_instances):
        dim = 2 if i % 2 == 0 else 3
        A = rng.standard_normal((dim, dim))
        Q = A @ A.T + 0.1 * np.eye(dim)
        x = 3.0 * rng.standard_normal(dim)
        M = float(rng.uniform(0.3, 1.2) * max(np.linalg.norm(x), 0.1))
        w = project_q_ball(x, Q, M)
        worst_norm_excess = max(worst_norm_excess, float(np.linalg.norm(w)) - M)
        oracle = grid_projection_qdist(x, Q, M)
        worst_slack = max(worst_slack, q_norm_sq(x - w, Q) - oracle)
    passed = worst_slack <= 1e-6 and worst_norm_excess <= 1e-10
    return CheckResult("projection_optimality", passed,
                       f"worst Q-distance slack vs grid oracle {worst_slack:.2e} (limit 1e-6); "
                       f"worst norm excess {worst_norm_excess:.2e} (limit 1e-10) "
                       f"over {n_instances} instances", time.time() - t0)


# --- reproducibility -----------------------------------------------------------


def _small_config(outdir: Optional[str]) -> harness.ExperimentConfig:
    spec = streams.StreamSpec(
        case=1, dim=3, num_tasks=30, samples_per_task=8, family=losses.Linear(),
        regime=models.BoundedUniform(2.0), noise=models.GaussianNoise(0.5), seed=7,
        w_star=np.array([0.5, -0.3, 0.2]))
    return harness.ExperimentConfig(stream=spec,
                                    learner=Alg1Config(family=losses.Linear(), mu=1.0, radius=10.0),
                                    checkpoint_every=None, output_dir=outdir,
                                    replicate_seeds=(7,))


def check_reproducibility() -> CheckResult:
    t0 = time.time()
    with tempfile.TemporaryDirectory() as tmp:
        out_a, out_b = Path(tmp) / "a", Path(tmp) / "b"
        harness.run_config(_small_config(str(out_a)))
        harness.run_config(_small_config(str(out_b)))
        csv_a = (out_a / "metrics_7.csv").read_bytes()
        csv_b = (out_b / "metrics_7.csv").read_bytes()
        passed = csv_a == csv_b
        details = (f"metrics CSVs byte-identical across two runs ({len(csv_a)} bytes)"
                   if passed else "metrics CSVs differ between two identical runs")
    return CheckResult("csv_reproducibility", passed, details, time.time() - t0)


# --- long-horizon trend and rate checks ----------------------------------------


def _fit_gap_exponent(run: harness.RunResult, lo: float, hi: float):
    stages = np.array([r.t for r in run.records], dtype=float)
    gaps = np.array([r.regret - r.l_star for r in run.records])
    return metrics.rate_fit(stages, gaps, window=(lo, hi))


def check_theorem1_trend() -> CheckResult:
    """Error times excitation over log-stage stays bounded; final error small."""
    t0 = time.time()
    runs = _runs("case1_linear", case1_linear_config)
    worst_ratio, worst_err = 0.0, 0.0
    for run in runs:
        recs = [r for r in run.records if 100 <= r.t <= 5000]
        ratios = [r.est_err_sq * r.lambda_min / math.log(r.t) for r in recs]
        worst_ratio = max(worst_ratio, max(ratios) / float(np.median(ratios)))
        worst_err = max(worst_err, run.records[-1].est_err_sq)
    passed = worst_ratio <= 10.0 and worst_err <= 1e-3
    return CheckResult("theorem1_trend", passed,
                       f"max/median of err*lambda_min/log t: {worst_ratio:.2f} (limit 10); "
                       f"final err^2 max {worst_err:.2e} (limit 1e-3) over 5 seeds",
                       time.time() - t0)


def check_theorem1_weak_excitation() -> CheckResult:
    t0 = time.time()
    runs = _runs("case1_weak", case1_weak_excitation_config)
    worst_err, shrink_ok = 0.0, True
    for run in runs:
        first = next(r for r in run.records if r.t >= 100)
        final = run.records[-1]
        worst_err = max(worst_err, final.est_err_sq)
        shrink_ok = shrink_ok and final.est_err_sq < first.est_err_sq
    passed = worst_err <= 1e-2 and shrink_ok
    return CheckResult("theorem1_weak_excitation", passed,
                       f"final err^2 max {worst_err:.2e} (limit 1e-2); error shrinks from "
                       f"stage 100 on all seeds: {shrink_ok}", time.time() - t0)


def check_theorem2_regret_rate_linear() -> CheckResult:
    t0 = time.time()
    runs = _runs("case1_linear", case1_linear_config)
    return _regret_rate_result("theorem2_regret_rate_linear", runs, (-1.3, -0.7), t0)


def _regret_rate_result(name: str, runs, band, t_start: float) -> CheckResult:
    exponents = []
    for run in runs:
        m = run.records[-1].t
        try:
            fit = _fit_gap_exponent(run, m / 2, m)
        except ValueError as exc:
            return CheckResult(name, False, f"regret gap not fittable: {exc}",
                               time.time() - t_start)
        exponents.append(fit.exponent)
    lo, hi = min(exponents), max(exponents)
    passed = all(band[0] <= e <= band[1] for e in exponents)
    return CheckResult(name, passed,
                       f"regret-gap exponents in [{lo:.3f}, {hi:.3f}] across 5 seeds "
                       f"(required band [{band[0]}, {band[1]}])",
                       time.time() - t_start)


def check_theorem2_forgetting_rate_linear() -> CheckResult:
    """Forgetting-gap decay exponent check.

    For the linear family the per-stage iterate is the exact ridge minimizer
    of everything seen so far, so the forgetting metric sits *below* the
    shared-target loss and the gap magnitude decays like 1/t.  The required
    band centered on -1/2 is therefore not expected to hold; the check
    reports the observed behavior honestly.
    """
    t0 = time.time()
    runs = _runs("case1_linear", case1_linear_config)
    nonpositive = 0
    exponents = []
    for run in runs:
        m = run.records[-1].t
        stages = np.array([r.t for r in run.records], dtype=float)
        gaps = np.array([r.forgetting - r.l_star for r in run.records])
        window = (stages >= m / 2) & (stages <= m)
        if np.any(gaps[window] <= 0):
            nonpositive += 1
            continue
        exponents.append(metrics.rate_fit(stages, gaps, window=(m / 2, m)).exponent)
    if nonpositive:
        details = (f"forgetting gap nonpositive inside the fit window on {nonpositive}/5 seeds "
                   "(estimate is the in-sample ridge minimizer, so forgetting sits below the "
                   "shared-target loss); log-log exponent in [-0.8, -0.3] unattainable")
        return CheckResult("theorem2_forgetting_rate_linear", False, details, time.time() - t0)
    passed = all(-0.8 <= e <= -0.3 for e in exponents)
    return CheckResult("theorem2_forgetting_rate_linear", passed,
                       f"forgetting-gap exponents {['%.3f' % e for e in exponents]} "
                       f"(required band [-0.8, -0.3])", time.time() - t0)


def check_theorem2_regret_rate_logistic() -> CheckResult:
    t0 = time.time()
    runs = _runs("case1_logistic",
                 lambda: case1_family_config(losses.Logistic(), models.BernoulliOutput()))
    return _regret_rate_result("theorem2_regret_rate_logistic", runs, (-1.3, -0.6), t0)


def check_theorem2_regret_rate_saturated() -> CheckResult:
    t0 = time.time()
    fam = losses.Saturated(l=-1.0, u=1.0, lout=-1.0, uout=1.0)
    runs = _runs("case1_saturated",
                 lambda: case1_family_config(fam, models.GaussianNoise(1.0)))
    return _regret_rate_result("theorem2_regret_rate_saturated", runs, (-1.3, -0.6), t0)


def check_theorems34_case2() -> CheckResult:
    t0 = time.time()
    runs = _runs("case2", case2_config)
    worst_err = max(run.records[-1].est_err_sq for run in runs)
    dominance = all(r.p_star <= r.l_star for run in runs for r in run.records)
    rate = _regret_rate_result("theorems34_case2", runs, (-1.3, -0.7), time.time())
    passed = worst_err <= 1e-2 and dominance and rate.passed
    details = (f"final err^2 max {worst_err:.2e} (limit 1e-2); per-task-optimum baseline <= "
               f"shared-target baseline at every checkpoint: {dominance}; {rate.details}")
    return CheckResult("theorems34_case2", passed, details, time.time() - t0)


def check_figure2_demo() -> CheckResult:
    """Three-group demo: the recursive learner lands on the target; SGD oscillates."""
    t0 = time.time()
    target = np.array(harness.DEMO_METAS).mean(axis=0)
    lines = []
    ok = True
    for order in ("sequential", "random"):
        dists = []
        for seed in ACCEPTANCE_SEEDS:
            run = harness.run_experiment(harness.demo_config(order, "alg2", seed))
            dists.append(math.sqrt(run.records[-1].est_err_sq))
        hits = sum(d <= 0.2 for d in dists)
        ok = ok and hits >= 4
        lines.append(f"{order}: final distance to target <= 0.2 on {hits}/5 seeds "
                     f"(max {max(dists):.3f})")
    min_far = None
    for seed in ACCEPTANCE_SEEDS:
        run = harness.run_experiment(harness.demo_config("random", "sgd", seed))
        traj = {t: w for t, w in run.trajectory}
        far = sum(1 for t in range(51, 101) if np.linalg.norm(traj[t] - target) > 0.5)
        min_far = far if min_far is None else min(min_far, far)
    ok = ok and min_far >= 10
    lines.append(f"sgd: distance > 0.5 at >= {min_far} of the final 50 stages on every seed "
                 "(required >= 10)")
    return CheckResult("figure2_demo", ok, "; ".join(lines), time.time() - t0)


# --- registry -------------------------------------------------------------------

CHECKS = (
    ("derivative_correctness", LEVEL_QUICK, check_derivative_correctness),
    ("recursive_batch_equivalence", LEVEL_QUICK, check_recursive_batch_equivalence),
    ("alg1_alg2_linear_equivalence", LEVEL_QUICK, check_alg1_alg2_equivalence),
    ("projection_optimality", LEVEL_QUICK, check_projection_optimality),
    ("csv_reproducibility", LEVEL_QUICK, check_reproducibility),
    ("theorem1_trend", LEVEL_FULL, check_theorem1_trend),
    ("theorem1_weak_excitation", LEVEL_FULL, check_theorem1_weak_excitation),
    ("theorem2_regret_rate_linear", LEVEL_FULL, check_theorem2_regret_rate_linear),
    ("theorem2_forgetting_rate_linear", LEVEL_FULL, check_theorem2_forgetting_rate_linear),
    ("theorem2_regret_rate_logistic", LEVEL_FULL, check_theorem2_regret_rate_logistic),
    ("theorem2_regret_rate_saturated", LEVEL_FULL, check_theorem2_regret_rate_saturated),
    ("theorems34_case2", LEVEL_FULL, check_theorems34_case2),
    ("figure2_demo", LEVEL_FULL, check_figure2_demo),
)


def run_checks(level: str = LEVEL_QUICK) -> list:
    """Run the quick suite, or everything for ``level='full'``."""
    if level not in (LEVEL_QUICK, LEVEL_FULL):
        raise ValueError(f"unknown verification level {level!r}")
    results = []
    for _, check_level, fn in CHECKS:
        if level == LEVEL_QUICK and check_level != LEVEL_QUICK:
            continue
        results.append(fn())
    return results
