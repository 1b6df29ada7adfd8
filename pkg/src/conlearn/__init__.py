"""Continual-learning estimators for stochastic regression task streams.

The package is organized as a small numpy/scipy library:

* :mod:`conlearn.numkit` — dense SPD solves, eigenvalues, normal pdf/cdf.
* :mod:`conlearn.losses` — linear / logistic / saturated loss calculus.
* :mod:`conlearn.models` — single-task synthetic data generation.
* :mod:`conlearn.streams` — task-stream assembly for both drift regimes.
* :mod:`conlearn.algorithms` — the two recursive learners and an SGD baseline.
* :mod:`conlearn.metrics` — forgetting, regret, excitation and rate fits.
* :mod:`conlearn.harness` — experiment configs, the run loop, CSV/JSON output.
* :mod:`conlearn.verify` — built-in verification checks (also ``conlearn verify``).
"""

from .algorithms import (
    Alg1Config,
    Alg2Config,
    LearnerState,
    SgdConfig,
    alg1_update,
    alg2_update,
    beta_schedule,
    init_state,
    project_q_ball,
    sgd_update,
)
from .errors import (
    ConfigError,
    ConlearnError,
    MalformedObservationError,
    NumericalDegeneracyError,
)
from .harness import ExperimentConfig, RunResult, parse_config, run_config, run_experiment
from .losses import (
    CurvatureBounds,
    Linear,
    Logistic,
    Saturated,
    curvature_bounds,
    g1,
    g2,
    loss_value,
    saturation_h,
)
from .metrics import (
    MetricsRecord,
    RateFit,
    RegretAccumulator,
    forgetting,
    lambda_min_accum,
    optimal_loss,
    rate_fit,
)
from .models import (
    BernoulliOutput,
    BoundedUniform,
    GaussianIid,
    GaussianNoise,
    LowExcitation,
    StudentTNoise,
    TaskData,
    UniformNoise,
    generate_task,
    moment_check,
)
from .numkit import min_eigenvalue, q_norm_sq, solve_spd, std_normal
from .streams import (
    Case2Meta,
    RandomOrder,
    Sequential,
    StreamSpec,
    TaskStream,
    build_stream,
    effective_target,
)

__version__ = "0.1.0"
