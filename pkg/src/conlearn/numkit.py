"""Small dense linear-algebra and normal-distribution kernel.

Everything here operates on plain float64 numpy arrays in dimensions up to
a few dozen.  Factorizations are refreshed on every call; no state is kept,
so all functions are safe to share across threads.
"""

import math

import numpy as np
from scipy import linalg as sla

from .errors import NumericalDegeneracyError

# Relative symmetry tolerance for accepting a matrix as symmetric.
SYMMETRY_RTOL = 1e-12

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    return A


def _as_vector(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


def require_symmetric(A, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate symmetry to within ``rtol`` relative and return the matrix."""
    A = _as_matrix(A)
    scale = max(1.0, float(np.abs(A).max()))
    if float(np.abs(A - A.T).max()) > rtol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return A


def solve_spd(A, b) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    Uses a Cholesky factorization with one step of iterative refinement so
    the residual satisfies ``||Ax - b|| <= 1e-10 * max(1, ||b||)``.
    """
    A = require_symmetric(A)
    b = _as_vector(b, A.shape[0])
    try:
        c, low = sla.cho_factor(A, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NumericalDegeneracyError(f"Cholesky factorization failed: {exc}") from exc
    x = sla.cho_solve((c, low), b, check_finite=False)
    # One refinement pass; cheap at these sizes and tightens the residual.
    r = b - A @ x
    x = x + sla.cho_solve((c, low), r, check_finite=False)
    resid = float(np.linalg.norm(b - A @ x))
    if not np.isfinite(resid) or resid > 1e-10 * max(1.0, float(np.linalg.norm(b))):
        raise NumericalDegeneracyError(
            f"SPD solve residual {resid:.3e} exceeds tolerance; matrix is near-degenerate"
        )
    return x


def min_eigenvalue(A) -> float:
    """Smallest eigenvalue of a symmetric matrix (full eigendecomposition)."""
    A = require_symmetric(A)
    return float(np.linalg.eigvalsh(A)[0])


def q_norm_sq(v, Q) -> float:
    """Weighted squared norm ``v^T Q v``."""
    Q = _as_matrix(Q)
    v = _as_vector(v, Q.shape[0])
    return float(v @ Q @ v)


def std_normal(x: float) -> tuple[float, float]:
    """Standard normal density and distribution function at a scalar ``x``."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    pdf = math.exp(-0.5 * x * x) * _INV_SQRT_2PI
    cdf = 0.5 * math.erfc(-x / _SQRT2)
    return pdf, cdf


def exact_colsum(a: np.ndarray) -> np.ndarray:
    """Exactly rounded column sums (``math.fsum`` along axis 0).

    The result is invariant under any permutation of the rows, which is the
    property the per-task update accumulators rely on.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return np.float64(math.fsum(a.tolist()))
    flat = a.reshape(a.shape[0], -1)
    out = np.empty(flat.shape[1])
    for j in range(flat.shape[1]):
        out[j] = math.fsum(flat[:, j].tolist())
    return out.reshape(a.shape[1:])


def exact_gram(X: np.ndarray) -> np.ndarray:
    """Sample-order-invariant ``sum_i x_i x_i^T`` for a stack of rows ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected an (n, d) array, got shape {X.shape}")
    n, d = X.shape
    G = np.zeros((d, d))
    for i in range(d):
        for j in range(i, d):
            s = math.fsum((X[:, i] * X[:, j]).tolist())
            G[i, j] = s
            G[j, i] = s
    return G
