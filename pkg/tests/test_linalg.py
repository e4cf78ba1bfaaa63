import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from upq_currents.errors import DimensionMismatch, NotHermitian, NotPositiveDefinite
from upq_currents.linalg import (
    as_cmatrix,
    cholesky_lower,
    dagger,
    map_matrix,
    nullspace_dimension,
    numerical_rank,
    real_linear_det,
)
from upq_currents.measures import (
    coords_to_s,
    jacobian_product_formula,
    right_translation_jacobian,
    s_to_coords,
)


def _random_lower(rng, n):
    low = np.tril(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), -1)
    return low + np.diag(np.exp(rng.standard_normal(n)))


def test_cholesky_identity():
    assert np.array_equal(cholesky_lower(np.eye(3)), np.eye(3))


def test_cholesky_scalar():
    assert np.allclose(cholesky_lower(np.array([[4.0]])), [[2.0]])


@given(seeds, st.integers(1, 6))
def test_cholesky_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    l0 = _random_lower(rng, n)
    low = cholesky_lower(l0 @ dagger(l0))
    assert np.max(np.abs(low - l0)) <= 1e-10 * max(1.0, np.abs(l0).max() ** 2)
    assert np.all(np.diagonal(low).imag == 0)
    assert np.all(np.triu(low, 1) == 0)


def test_cholesky_errors():
    with pytest.raises(NotHermitian):
        cholesky_lower(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(NotPositiveDefinite):
        cholesky_lower(np.diag([1.0, -1.0]))
    with pytest.raises(DimensionMismatch):
        cholesky_lower(np.ones((2, 3)))


def test_cholesky_does_not_modify_input():
    m = np.array([[4.0, 1.0], [1.0, 3.0]], dtype=complex)
    before = m.copy()
    cholesky_lower(m)
    assert np.array_equal(m, before)


def test_as_cmatrix_checks():
    assert as_cmatrix(2.0).shape == (1, 1)
    with pytest.raises(DimensionMismatch):
        as_cmatrix(np.zeros((2, 2)), rows=3)
    with pytest.raises(ValueError):
        as_cmatrix([[np.nan]])


def test_real_linear_det_trivial():
    assert real_linear_det(np.eye(2)) == 1.0
    for d in (1, 3, 5):
        assert real_linear_det(2 * np.eye(d)) == pytest.approx(2.0**d)
    assert real_linear_det([]) == 1.0
    with pytest.raises(DimensionMismatch):
        real_linear_det([[1.0, 2.0]])


@given(seeds, st.integers(1, 3))
def test_right_translation_det_matches_product_formula(seed, p):
    rng = np.random.default_rng(seed)
    s0 = _random_lower(rng, p)
    dense = np.linalg.det(map_matrix(lambda c: s_to_coords(coords_to_s(c, p) @ s0), p * p))
    assert right_translation_jacobian(s0) == pytest.approx(dense, rel=1e-10)
    assert right_translation_jacobian(s0) == pytest.approx(jacobian_product_formula(s0), rel=1e-9)


def test_rank_helpers():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert numerical_rank(a) == 1
    assert nullspace_dimension(a) == 1
    assert numerical_rank(np.zeros((0, 0))) == 0
    assert numerical_rank(np.zeros((2, 2))) == 0


@given(seeds, st.integers(1, 3))
def test_coordinates_round_trip(seed, p):
    rng = np.random.default_rng(seed)
    s = _random_lower(rng, p)
    assert np.array_equal(coords_to_s(s_to_coords(s), p), s)
