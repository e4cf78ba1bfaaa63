"""Nondegenerate characters of the centre of the Heisenberg group."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, NotSkewHermitian
from .linalg import dagger


def sign_vector(eps, p: int | None = None) -> np.ndarray:
    """Validate a vector of +-1 signs and return it as an int array."""
    e = np.asarray(eps, dtype=int).ravel()
    if e.size == 0 or not np.all(np.isin(e, (-1, 1))):
        raise InvalidInput(f"sign vector must contain only +1/-1, got {eps!r}")
    if p is not None and e.size != p:
        raise InvalidInput(f"sign vector must have length {p}, got {e.size}")
    return e


def all_plus(p: int) -> np.ndarray:
    return np.ones(p, dtype=int)


def char_eval(eps, s: np.ndarray, n: np.ndarray, tol: float = 1e-12) -> complex:
    """``chi_s^eps(n) = exp(tr(eps s n s^*))``.

    The trace of eps times a skew-Hermitian matrix is purely imaginary, so the
    value lies on the unit circle; the real part is dropped explicitly.
    """
    n = np.asarray(n, dtype=np.complex128)
    if np.linalg.norm(n + dagger(n)) > tol * max(1.0, float(np.linalg.norm(n))):
        raise NotSkewHermitian("character argument must be skew-Hermitian")
    e = sign_vector(eps, n.shape[0])
    s = np.asarray(s, dtype=np.complex128)
    m = s @ n @ dagger(s)
    phase = float(np.sum(e * np.diagonal(m).imag))
    return complex(np.exp(1j * phase))


def orbit_separation(
    eps1,
    eps2,
    samples: Iterable[tuple[np.ndarray, np.ndarray]],
    tol: float = 1e-9,
) -> bool:
    """True if some sampled ``(s, n)`` gives different character values."""
    e1, e2 = sign_vector(eps1), sign_vector(eps2)
    if e1.shape == e2.shape and np.array_equal(e1, e2):
        raise InvalidInput("orbit separation needs two different sign vectors")
    for s, n in samples:
        if abs(char_eval(e1, s, n) - char_eval(e2, s, n)) > tol:
            return True
    return False


def sign_vectors(p: int) -> list[np.ndarray]:
    """All 2^p sign vectors, one per nondegenerate orbit."""
    grid = np.array(np.meshgrid(*[[1, -1]] * p, indexing="ij")).reshape(p, -1).T
    return [row.astype(int) for row in grid]


def diag_probe(values: Sequence[float]) -> np.ndarray:
    """Skew-Hermitian ``diag(i v_1, ..., i v_p)``."""
    return np.diag(1j * np.asarray(values, dtype=float))
