"""Small dense complex linear algebra used by every other module.

All matrices here are at most 6x6, so everything is plain numpy with
double-precision complex entries. Functions never modify their inputs.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPositiveDefinite

ATOL = 1e-10


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes (works on stacks)."""
    return np.conj(np.swapaxes(m, -1, -2))


def as_cmatrix(m, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise DimensionMismatch(f"expected {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise DimensionMismatch(f"expected {cols} columns, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def cholesky_lower(m, herm_tol: float = 1e-12) -> np.ndarray:
    """Lower-triangular Cholesky factor ``L`` with ``L @ L^* == m``.

    Parameters
    ----------
    m : array_like
        Hermitian positive-definite matrix.
    herm_tol : float
        Allowed deviation ``|m - m^*|`` relative to ``max(1, |m|)``.

    Returns
    -------
    ndarray
        Lower-triangular factor with a real, strictly positive diagonal.
    """
    a = as_cmatrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"cholesky needs a square matrix, got {a.shape}")
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.linalg.norm(a - dagger(a)) > herm_tol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + dagger(a))
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    d = np.diagonal(low)
    if np.any(d.real <= 0) or not np.all(np.isfinite(low)):
        raise NotPositiveDefinite("non-positive pivot")
    # numpy already returns a real diagonal; force exact zero imaginary parts
    low[np.diag_indices_from(low)] = d.real
    return low


def real_linear_det(images: Sequence[Sequence[float]]) -> float:
    """Determinant of a real-linear map from the images of the basis vectors.

    ``images[k]`` holds the real coordinates of F(e_k); together they form the
    columns of the d x d matrix of F.
    """
    cols = [np.asarray(v, dtype=float).ravel() for v in images]
    d = len(cols)
    if d == 0:
        return 1.0
    if any(c.size != d for c in cols):
        raise DimensionMismatch("each image must have as many coordinates as there are basis vectors")
    return float(np.linalg.det(np.column_stack(cols)))


def map_matrix(apply: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Real matrix of a linear map on R^dim given as a function on coordinate vectors."""
    eye = np.eye(dim)
    return np.column_stack([np.asarray(apply(eye[k]), dtype=float).ravel() for k in range(dim)])


def numerical_rank(a: np.ndarray, rtol: float = 1e-9) -> int:
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def nullspace_dimension(a: np.ndarray, rtol: float = 1e-9) -> int:
    return a.shape[1] - numerical_rank(a, rtol)


def skew_hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - dagger(m))
