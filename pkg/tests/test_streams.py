"""Stream assembly tests: both cases, orders, drift structure, determinism."""

import math

import numpy as np
import pytest

from conlearn import losses, metrics, models, streams
from conlearn.errors import ConfigError

METAS = ((4.0, 2.0), (5.5, -1.5), (3.0, -1.0))


def case1_spec(**kw):
    defaults = dict(case=1, dim=2, num_tasks=10, samples_per_task=5,
                    family=losses.Linear(), regime=models.BoundedUniform(2.0),
                    noise=models.GaussianNoise(0.5), seed=3,
                    w_star=np.array([1.0, -0.5]))
    defaults.update(kw)
    return streams.StreamSpec(**defaults)


def case2_spec(**kw):
    defaults = dict(case=2, dim=2, num_tasks=60, samples_per_task=5,
                    family=losses.Linear(), regime=models.GaussianIid(1.0),
                    noise=models.GaussianNoise(0.5), seed=5,
                    case2=streams.Case2Meta(metas=METAS, perturbation_sigma=0.7))
    defaults.update(kw)
    return streams.StreamSpec(**defaults)


def task_fingerprints(stream):
    return sorted((t.features.tobytes(), t.outputs.tobytes()) for t in stream.tasks)


class TestCase1:
    def test_single_task_stream(self):
        stream = streams.build_stream(case1_spec(num_tasks=1))
        assert len(stream.tasks) == 1
        np.testing.assert_array_equal(stream.per_task_w[0], stream.w_star)

    def test_per_task_parameters_constant(self):
        stream = streams.build_stream(case1_spec())
        assert np.all(stream.per_task_w == stream.w_star)

    def test_effective_target_is_w_star(self):
        spec = case1_spec()
        np.testing.assert_array_equal(streams.effective_target(spec), spec.w_star)

    def test_missing_w_star_rejected(self):
        with pytest.raises(ConfigError):
            case1_spec(w_star=None)


class TestCase2:
    def test_single_meta_zero_perturbation_reduces_to_case1(self):
        meta = streams.Case2Meta(metas=((1.0, -2.0),), perturbation_sigma=0.0)
        stream = streams.build_stream(case2_spec(case2=meta))
        assert np.all(stream.per_task_w == np.array([1.0, -2.0]))
        np.testing.assert_array_equal(stream.w_star, [1.0, -2.0])

    def test_effective_target_symmetry(self):
        meta = streams.Case2Meta(metas=((1.0, 0.0), (-1.0, 0.0)), perturbation_sigma=0.3)
        np.testing.assert_allclose(streams.effective_target(case2_spec(case2=meta)),
                                   [0.0, 0.0], atol=1e-15)

    def test_effective_target_three_group_mean(self):
        target = streams.effective_target(case2_spec())
        np.testing.assert_allclose(target, [25.0 / 6.0, -1.0 / 6.0], rtol=1e-15)

    def test_blocked_assignment_balanced(self):
        spec = case2_spec(num_tasks=100)
        stream = streams.build_stream(spec)
        counts = np.bincount(stream.groups)
        assert sorted(counts.tolist()) == [33, 33, 34]

    def test_uniform_assignment_draws_all_groups(self):
        meta = streams.Case2Meta(metas=METAS, perturbation_sigma=0.7,
                                 assignment=streams.ASSIGNMENT_UNIFORM)
        stream = streams.build_stream(case2_spec(case2=meta, num_tasks=300))
        assert set(np.unique(stream.groups)) == {0, 1, 2}

    def test_drift_mean_small(self):
        m, sigma, d = 400, 0.7, 2
        spec = case2_spec(num_tasks=m,
                          case2=streams.Case2Meta(metas=METAS, perturbation_sigma=sigma))
        stream = streams.build_stream(spec)
        drift = stream.per_task_w - stream.w_star
        assert np.linalg.norm(drift.mean(axis=0)) <= 5 * sigma * math.sqrt(d / m)

    def test_empty_meta_set_rejected(self):
        with pytest.raises(ConfigError):
            streams.Case2Meta(metas=(), perturbation_sigma=0.1)

    def test_meta_dimension_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            case2_spec(case2=streams.Case2Meta(metas=((1.0, 2.0, 3.0),),
                                               perturbation_sigma=0.1))


class TestOrders:
    def test_random_order_is_permutation_of_same_tasks(self):
        seq = streams.build_stream(case2_spec(order=streams.Sequential()))
        rnd = streams.build_stream(case2_spec(order=streams.RandomOrder(seed=17)))
        assert task_fingerprints(seq) == task_fingerprints(rnd)
        first_seq = [t.outputs.tobytes() for t in seq.tasks]
        first_rnd = [t.outputs.tobytes() for t in rnd.tasks]
        assert first_seq != first_rnd  # different visitation order

    def test_sequential_case2_visits_groups_in_blocks(self):
        meta = streams.Case2Meta(metas=METAS, perturbation_sigma=0.7,
                                 assignment=streams.ASSIGNMENT_UNIFORM)
        stream = streams.build_stream(case2_spec(case2=meta, order=streams.Sequential()))
        assert np.all(np.diff(stream.groups) >= 0)

    def test_optimal_loss_order_invariant(self):
        seq = streams.build_stream(case2_spec(order=streams.Sequential()))
        rnd = streams.build_stream(case2_spec(order=streams.RandomOrder(seed=17)))
        l_seq = metrics.optimal_loss(seq.tasks, seq.w_star, losses.Linear())
        l_rnd = metrics.optimal_loss(rnd.tasks, rnd.w_star, losses.Linear())
        assert l_seq == pytest.approx(l_rnd, rel=1e-12)

    def test_per_task_w_follows_visitation_order(self):
        rnd = streams.build_stream(case2_spec(order=streams.RandomOrder(seed=17)))
        for task, w in zip(rnd.tasks, rnd.per_task_w):
            np.testing.assert_array_equal(task.w_true, w)


class TestDeterminism:
    def test_build_stream_bit_reproducible(self):
        a = streams.build_stream(case2_spec())
        b = streams.build_stream(case2_spec())
        assert task_fingerprints(a) == task_fingerprints(b)
        assert a.per_task_w.tobytes() == b.per_task_w.tobytes()

    def test_seed_changes_stream(self):
        a = streams.build_stream(case2_spec(seed=5))
        b = streams.build_stream(case2_spec(seed=6))
        assert task_fingerprints(a) != task_fingerprints(b)
