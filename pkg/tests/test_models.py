"""Generator tests: feature regimes, noise laws, family output rules, determinism."""

import math

import numpy as np
import pytest

from conlearn import losses, metrics, models
from conlearn.errors import ConfigError

SAT = losses.Saturated(l=-1.0, u=1.0, lout=-1.0, uout=1.0)


def make_task(**kw):
    defaults = dict(family=losses.Linear(), w_true=np.array([1.0, 0.0]), n=50,
                    regime=models.BoundedUniform(2.0), noise=models.GaussianNoise(0.5),
                    key=(0, 0), task_index=0)
    defaults.update(kw)
    return models.generate_task(**defaults)


class TestGenerateTask:
    def test_empty_task(self):
        task = make_task(n=0)
        assert task.n == 0
        assert task.features.shape == (0, 2)

    def test_noiseless_linear_exact(self):
        task = make_task(noise=models.UniformNoise(0.0), n=20)
        np.testing.assert_allclose(task.outputs, task.features @ task.w_true, atol=1e-15)

    def test_deterministic_bit_identical(self):
        a = make_task(key=(3, 14))
        b = make_task(key=(3, 14))
        assert a.features.tobytes() == b.features.tobytes()
        assert a.outputs.tobytes() == b.outputs.tobytes()
        c = make_task(key=(3, 15))
        assert a.outputs.tobytes() != c.outputs.tobytes()

    def test_arrays_read_only(self):
        task = make_task()
        with pytest.raises(ValueError):
            task.features[0, 0] = 99.0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            models.generate_task(losses.Linear(), np.ones((2, 2)), 5,
                                 models.BoundedUniform(1.0), models.GaussianNoise(1.0), key=0)


class TestFeatureRegimes:
    def test_bounded_uniform_strict_norm(self):
        task = make_task(n=5000, regime=models.BoundedUniform(1.7))
        norms = np.linalg.norm(task.features, axis=1)
        assert np.all(norms < 1.7)

    def test_gaussian_iid_scalar_covariance(self):
        task = make_task(n=50_000, regime=models.GaussianIid(2.0))
        cov = np.cov(task.features.T)
        np.testing.assert_allclose(cov, 2.0 * np.eye(2), atol=0.1)

    def test_gaussian_iid_matrix_covariance(self):
        target = np.array([[1.0, 0.6], [0.6, 2.0]])
        task = make_task(n=80_000, regime=models.GaussianIid(target))
        np.testing.assert_allclose(np.cov(task.features.T), target, atol=0.1)

    def test_low_excitation_structure(self):
        regime = models.LowExcitation(bound=2.0, exponent=0.6, rate=2.0)
        w = np.zeros(4)
        seen_other = 0
        for t in range(200):
            task = models.generate_task(losses.Linear(), w, 6, regime,
                                        models.GaussianNoise(0.5), key=(1, t), task_index=t)
            norms = np.linalg.norm(task.features, axis=1)
            np.testing.assert_allclose(norms, 1.0, atol=1e-12)  # bound/2 exactly
            seen_other += int(np.any(task.features[:, 1:] != 0.0))
        assert 0 < seen_other < 200  # the coin both fires and rests

    def test_low_excitation_gram_growth_exponent(self):
        regime = models.LowExcitation(bound=2.0, exponent=0.6, rate=2.0)
        w = np.zeros(4)
        tasks = [models.generate_task(losses.Linear(), w, 6, regime,
                                      models.GaussianNoise(0.5), key=(2, t), task_index=t)
                 for t in range(3000)]
        stages, lams = [], []
        acc = metrics.GramAccumulator(4)
        for t, task in enumerate(tasks, start=1):
            acc.add_task(task)
            if t % 100 == 0:
                stages.append(t)
                lams.append(acc.value())
        fit = metrics.rate_fit(np.array(stages, float), np.array(lams), window=(300, 3000))
        assert 0.4 < fit.exponent < 0.8

    def test_low_excitation_rejects_bad_exponent(self):
        with pytest.raises(ValueError):
            models.LowExcitation(bound=1.0, exponent=1.2)


class TestNoise:
    @pytest.mark.parametrize("noise", [
        models.GaussianNoise(0.7),
        models.UniformNoise(1.2),
        models.StudentTNoise(dof=4.0, scale=0.5),
    ])
    def test_zero_mean_and_finite_moment(self, noise):
        task = make_task(n=100_000, noise=noise, w_true=np.zeros(2))
        z = task.outputs
        se = z.std(ddof=1) / math.sqrt(len(z))
        assert abs(z.mean()) < 3 * se
        assert math.isfinite(models.moment_check(z, 2.5))

    def test_student_t_requires_heavy_tail_guard(self):
        with pytest.raises(ValueError):
            models.StudentTNoise(dof=2.0, scale=1.0)


class TestFamilyOutputs:
    def test_logistic_bernoulli_mean(self):
        w = np.array([0.8, -0.3])
        task = make_task(family=losses.Logistic(), noise=models.BernoulliOutput(),
                         w_true=w, n=200_000)
        assert set(np.unique(task.outputs)) <= {0.0, 1.0}
        p = losses.sigmoid(task.features @ w)
        resid = task.outputs - p
        assert abs(resid.mean()) < 3 * resid.std(ddof=1) / math.sqrt(task.n)

    def test_logistic_additive_noise_clipped(self):
        task = make_task(family=losses.Logistic(), noise=models.UniformNoise(0.3), n=5000)
        assert np.all((task.outputs >= 0.0) & (task.outputs <= 1.0))

    def test_saturated_outputs_in_structure(self):
        task = make_task(family=SAT, noise=models.GaussianNoise(1.0), n=20_000,
                         w_true=np.array([0.5, 0.5]))
        y = task.outputs
        interior = (y != SAT.lout) & (y != SAT.uout)
        assert np.all((y[interior] > SAT.l) & (y[interior] < SAT.u))

    def test_saturated_censoring_fraction(self):
        # At w* = 0 the latent is standard normal: censoring fraction 2 F(-1).
        n = 100_000
        task = make_task(family=SAT, noise=models.GaussianNoise(1.0), n=n,
                         w_true=np.zeros(2))
        frac = np.mean((task.outputs == SAT.lout) | (task.outputs == SAT.uout))
        p = 2.0 * 0.15865525393145707
        se = math.sqrt(p * (1 - p) / n)
        assert abs(frac - p) < 3 * se

    def test_saturated_requires_unit_gaussian_noise(self):
        with pytest.raises(ConfigError):
            make_task(family=SAT, noise=models.GaussianNoise(0.5))
        with pytest.raises(ConfigError):
            make_task(family=SAT, noise=models.UniformNoise(1.0))


class TestMomentCheck:
    def test_constant_zero(self):
        assert models.moment_check(np.zeros(10), 2.0) == 0.0

    def test_alternating_signs(self):
        assert models.moment_check(np.array([1.0, -1.0] * 8), 2.0) == 1.0

    def test_standard_normal_second_moment(self):
        rng = np.random.default_rng(11)
        z = rng.standard_normal(100_000)
        m2 = models.moment_check(z, 2.0)
        se = (z**2).std(ddof=1) / math.sqrt(len(z))
        assert abs(m2 - 1.0) < 3 * se

    def test_rejects_empty_and_bad_order(self):
        with pytest.raises(ValueError):
            models.moment_check([], 2.0)
        with pytest.raises(ValueError):
            models.moment_check([1.0], 0.0)
