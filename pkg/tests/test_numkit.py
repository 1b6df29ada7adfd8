"""Kernel tests: SPD solves, eigenvalues, weighted norms, normal pdf/cdf.

Each operation is checked against an independent oracle: naive Gaussian
elimination for the solver, the characteristic polynomial for the 2x2
eigenvalue, hand expansion for the weighted norm, and adaptive quadrature
for the normal cdf.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from conlearn import numkit
from conlearn.errors import NumericalDegeneracyError


def gaussian_elimination_solve(A, b):
    """Row-reduction oracle, written independently of the production path."""
    A = [list(map(float, row)) for row in A]
    b = list(map(float, b))
    n = len(b)
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(A[r][col]))
        A[col], A[pivot] = A[pivot], A[col]
        b[col], b[pivot] = b[pivot], b[col]
        for row in range(col + 1, n):
            f = A[row][col] / A[col][col]
            for k in range(col, n):
                A[row][k] -= f * A[col][k]
            b[row] -= f * b[col]
    x = [0.0] * n
    for row in range(n - 1, -1, -1):
        s = b[row] - sum(A[row][k] * x[k] for k in range(row + 1, n))
        x[row] = s / A[row][row]
    return np.array(x)


def random_spd(rng, dim, jitter=0.5):
    A = rng.standard_normal((dim, dim))
    return A @ A.T + jitter * np.eye(dim)


class TestSolveSpd:
    def test_identity(self):
        x = numkit.solve_spd(np.eye(2), [3.0, -1.0])
        np.testing.assert_allclose(x, [3.0, -1.0], rtol=0, atol=0)

    def test_diagonal(self):
        x = numkit.solve_spd(np.diag([2.0, 4.0]), [2.0, 4.0])
        np.testing.assert_allclose(x, [1.0, 1.0], rtol=1e-14)

    def test_against_elimination_oracle(self):
        rng = np.random.default_rng(41)
        A = random_spd(rng, 5)
        b = rng.standard_normal(5)
        x = numkit.solve_spd(A, b)
        np.testing.assert_allclose(x, gaussian_elimination_solve(A, b), rtol=1e-9, atol=1e-12)

    def test_residual_property(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            dim = int(rng.integers(1, 12))
            A = random_spd(rng, dim)
            b = rng.standard_normal(dim)
            x = numkit.solve_spd(A, b)
            resid = np.linalg.norm(A @ x - b)
            assert resid <= 1e-10 * max(1.0, np.linalg.norm(b))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            numkit.solve_spd(np.array([[np.nan, 0.0], [0.0, 1.0]]), [1.0, 1.0])
        with pytest.raises(ValueError):
            numkit.solve_spd(np.eye(2), [np.inf, 0.0])

    def test_rejects_indefinite(self):
        with pytest.raises(NumericalDegeneracyError):
            numkit.solve_spd(np.array([[1.0, 2.0], [2.0, 1.0]]), [1.0, 1.0])

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            numkit.solve_spd(np.array([[1.0, 0.5], [0.0, 1.0]]), [1.0, 1.0])


class TestMinEigenvalue:
    def test_identity(self):
        assert numkit.min_eigenvalue(np.eye(2)) == pytest.approx(1.0, abs=1e-14)

    def test_diagonal(self):
        assert numkit.min_eigenvalue(np.diag([2.0, 5.0])) == pytest.approx(2.0, abs=1e-14)

    def test_characteristic_polynomial_oracle(self):
        # Smaller root of x^2 - 5x + 5 for [[3, 1], [1, 2]].
        root = (5.0 - math.sqrt(5.0)) / 2.0
        val = numkit.min_eigenvalue(np.array([[3.0, 1.0], [1.0, 2.0]]))
        assert val == pytest.approx(root, rel=1e-12)

    def test_rayleigh_bound(self):
        rng = np.random.default_rng(43)
        A = random_spd(rng, 6)
        lam = numkit.min_eigenvalue(A)
        for _ in range(100):
            v = rng.standard_normal(6)
            assert lam <= (v @ A @ v) / (v @ v) + 1e-10

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            numkit.min_eigenvalue(np.array([[1.0, 1e-6], [0.0, 1.0]]))


class TestQNormSq:
    def test_identity_weight(self):
        assert numkit.q_norm_sq([1.0, 2.0], np.eye(2)) == pytest.approx(5.0, abs=0)

    def test_zero_vector(self):
        assert numkit.q_norm_sq([0.0, 0.0], np.eye(2)) == 0.0

    def test_hand_expansion(self):
        Q = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert numkit.q_norm_sq([1.0, 1.0], Q) == pytest.approx(6.0, rel=1e-14)

    def test_matches_euclidean_norm(self):
        rng = np.random.default_rng(44)
        for _ in range(20):
            v = rng.standard_normal(4)
            assert numkit.q_norm_sq(v, np.eye(4)) == pytest.approx(float(v @ v), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            numkit.q_norm_sq([1.0, 2.0, 3.0], np.eye(2))


class TestStdNormal:
    def test_origin(self):
        pdf, cdf = numkit.std_normal(0.0)
        assert pdf == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-15)
        assert cdf == pytest.approx(0.5, abs=1e-15)

    def test_upper_limit(self):
        _, cdf = numkit.std_normal(8.0)
        assert cdf == pytest.approx(1.0, abs=1e-12)

    def test_quadrature_oracle(self):
        for x in (-3.0, -1.0, 0.3, 1.0, 2.5):
            pdf, cdf = numkit.std_normal(x)
            quad, _ = integrate.quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi),
                                     -12.0, x)
            assert cdf == pytest.approx(quad, abs=1e-12)
        assert numkit.std_normal(1.0)[1] == pytest.approx(0.8413447461, abs=1e-10)

    def test_symmetry_and_monotonicity(self):
        xs = np.linspace(-8.0, 8.0, 401)
        cdfs = [numkit.std_normal(x)[1] for x in xs]
        assert all(b >= a for a, b in zip(cdfs, cdfs[1:]))
        for x in xs:
            assert numkit.std_normal(x)[1] + numkit.std_normal(-x)[1] == pytest.approx(
                1.0, abs=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            numkit.std_normal(float("nan"))


class TestExactSums:
    def test_colsum_matches_fsum(self):
        rng = np.random.default_rng(45)
        a = rng.standard_normal((100, 3)) * 10.0 ** rng.integers(-8, 8, size=(100, 3))
        out = numkit.exact_colsum(a)
        for j in range(3):
            assert out[j] == math.fsum(a[:, j].tolist())

    def test_permutation_invariance_bitwise(self):
        rng = np.random.default_rng(46)
        a = rng.standard_normal((64, 4))
        perm = rng.permutation(64)
        assert numkit.exact_colsum(a).tobytes() == numkit.exact_colsum(a[perm]).tobytes()

    def test_gram_symmetric_and_permutation_invariant(self):
        rng = np.random.default_rng(47)
        X = rng.standard_normal((30, 5))
        G = numkit.exact_gram(X)
        assert np.array_equal(G, G.T)
        perm = rng.permutation(30)
        assert G.tobytes() == numkit.exact_gram(X[perm]).tobytes()
        np.testing.assert_allclose(G, X.T @ X, rtol=1e-12, atol=1e-12)
