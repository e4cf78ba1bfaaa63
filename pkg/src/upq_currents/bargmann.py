"""Truncated Bargmann-Fock spaces and the Heisenberg-group operators on them.

The Bargmann space of type ``eps`` has the orthonormal monomial basis
``prod_v x_v^{k_v} / sqrt(k_v!)`` where ``x = z`` on rows with ``eps_i = +1``
and ``x = conj(z)`` on rows with ``eps_i = -1``.  We keep all monomials of
total degree at most ``D``.

On a single variable the operator of ``(n0, z0)`` is a scalar times
``exp(-c a^+) exp(d a)``: shifting ``x -> x + d`` then multiplying by
``exp(-c x)``.  Its matrix elements are products of one-variable elements, so
the truncated operator is the exact operator compressed to the basis.

The fibre over ``s`` uses ``T_s(h) = T(s.h)`` with ``s.(n, z) = (s n s^*, s z)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .characters import sign_vector
from .errors import DimensionMismatch, InvalidInput, QuadratureUnstable
from .group import Signature
from .iwasawa import HeisenbergElement, heis_mul, s_act
from .linalg import dagger

COMMUTANT_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class MultiIndexBasis:
    """Multi-indices over the ``p * (q-p)`` entries of ``z``, total degree <= D.

    Ordered by total degree, then lexicographically (descending), so the
    vacuum comes first.  Variable ``v`` is entry ``(v // (q-p), v % (q-p))``.
    """

    sig: Signature
    max_degree: int
    indices: np.ndarray = field(repr=False)

    @property
    def n_vars(self) -> int:
        return self.sig.p * self.sig.m

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    def position(self, k) -> int:
        return _position_table(self.sig.p, self.sig.q, self.max_degree)[tuple(int(v) for v in k)]

    def block(self, degree: int) -> np.ndarray:
        """Positions of basis elements of total degree <= ``degree``."""
        return np.flatnonzero(self.degrees <= degree)

    def var_rows(self) -> np.ndarray:
        m = self.sig.m
        return np.arange(self.n_vars) // m if m else np.zeros(0, dtype=int)


@lru_cache(maxsize=None)
def _indices(n_vars: int, D: int) -> np.ndarray:
    out = []
    for deg in range(D + 1):
        level = [c for c in itertools.product(range(deg + 1), repeat=n_vars) if sum(c) == deg]
        level.sort(reverse=True)
        out.extend(level)
    arr = np.array(out, dtype=int).reshape(len(out), n_vars)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _position_table(p: int, q: int, D: int) -> dict:
    idx = _indices(p * (q - p), D)
    return {tuple(int(v) for v in row): i for i, row in enumerate(idx)}


def make_basis(sig: Signature, D: int) -> MultiIndexBasis:
    if D < 0:
        raise InvalidInput("truncation degree must be >= 0")
    return MultiIndexBasis(sig, D, _indices(sig.p * sig.m, D))


@dataclass(frozen=True, eq=False)
class BargmannVector:
    basis: MultiIndexBasis
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).ravel()
        if c.size != self.basis.size:
            raise DimensionMismatch(f"{c.size} coefficients for a basis of size {self.basis.size}")
        object.__setattr__(self, "coeffs", c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "BargmannVector") -> complex:
        """``<self, other>``, linear in the first argument."""
        return complex(np.vdot(other.coeffs, self.coeffs))

    def __sub__(self, other):
        return BargmannVector(self.basis, self.coeffs - other.coeffs)

    def __add__(self, other):
        return BargmannVector(self.basis, self.coeffs + other.coeffs)

    def __mul__(self, c):
        return BargmannVector(self.basis, self.coeffs * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class BargmannOperator:
    basis: MultiIndexBasis
    matrix: np.ndarray = field(repr=False)

    def __matmul__(self, other):
        if isinstance(other, BargmannVector):
            return BargmannVector(self.basis, self.matrix @ other.coeffs)
        if isinstance(other, BargmannOperator):
            return BargmannOperator(self.basis, self.matrix @ other.matrix)
        return NotImplemented

    def block(self, degree: int) -> np.ndarray:
        idx = self.basis.block(degree)
        return self.matrix[np.ix_(idx, idx)]


def vacuum(basis: MultiIndexBasis) -> BargmannVector:
    c = np.zeros(basis.size, dtype=np.complex128)
    c[0] = 1.0
    return BargmannVector(basis, c)


# --- one-variable building blocks -----------------------------------------

@lru_cache(maxsize=None)
def _sqrt_fact_ratio(D: int) -> np.ndarray:
    """r[k, j] = sqrt(k! / j!) / (k - j)! for k >= j, else 0."""
    r = np.zeros((D + 1, D + 1))
    for k in range(D + 1):
        for j in range(k + 1):
            r[k, j] = math.exp(0.5 * (math.lgamma(k + 1) - math.lgamma(j + 1)) - math.lgamma(k - j + 1))
    r.setflags(write=False)
    return r


def _one_var_table(c: complex, d: complex, D: int) -> np.ndarray:
    """Matrix of ``exp(-c a^+) exp(d a)`` on degrees 0..D (exact compression)."""
    r = _sqrt_fact_ratio(D)
    k = np.arange(D + 1)
    diff = k[:, None] - k[None, :]
    pw = np.where(diff >= 0, diff, 0)
    create = np.where(diff >= 0, r * (-c) ** pw, 0.0)          # [k, j]
    shift = np.where(diff >= 0, r * d ** pw, 0.0).T              # [j, l]
    return create @ shift


def _fibre_params(eps: np.ndarray, h: HeisenbergElement):
    """Scalar exponent and per-variable (c, d) for ``T^eps(n, z)``."""
    w = h.z
    scalar = complex(np.sum(eps * np.diagonal(h.n)) - 0.5 * np.sum(np.abs(w) ** 2))
    rows = np.repeat(eps, h.sig.m)
    wv = w.ravel()
    c = np.where(rows > 0, np.conj(wv), wv)
    d = np.where(rows > 0, wv, np.conj(wv))
    return scalar, c, d


def rep_operator(eps, s: np.ndarray, h: HeisenbergElement, D: int) -> BargmannOperator:
    """Truncated matrix of the fibre operator ``T_s^eps(h)`` on degree <= D."""
    eps = sign_vector(eps, h.sig.p)
    basis = make_basis(h.sig, D)
    hs = s_act(s, h)
    scalar, c, d = _fibre_params(eps, hs)
    mat = np.full((basis.size, basis.size), np.exp(scalar), dtype=np.complex128)
    idx = basis.indices
    for v in range(basis.n_vars):
        tab = _one_var_table(c[v], d[v], D)
        mat *= tab[idx[:, v][:, None], idx[:, v][None, :]]
    return BargmannOperator(basis, mat)


def vacuum_images(eps, w: np.ndarray, central_phase: np.ndarray, basis: MultiIndexBasis) -> np.ndarray:
    """Batch of ``T^eps(n, w) 1`` coefficient vectors.

    ``w`` has shape (N, p, q-p) (already moved by s) and ``central_phase`` is
    ``sum_i eps_i n_ii`` for each sample.  Row ``k`` of the result is
    ``exp(phase - |w|^2/2) prod_v (-c_v)^{k_v} / sqrt(k_v!)``.
    """
    eps = sign_vector(eps, basis.sig.p)
    w = np.asarray(w, dtype=np.complex128).reshape(len(central_phase), -1)
    rows = np.repeat(eps, basis.sig.m)
    c = np.where(rows > 0, np.conj(w), w)
    scalar = np.exp(np.asarray(central_phase) - 0.5 * np.sum(np.abs(w) ** 2, axis=1))
    idx = basis.indices
    inv_sqrt_fact = np.exp(-0.5 * np.array([math.lgamma(k + 1) for k in range(basis.max_degree + 1)]))
    out = np.broadcast_to(scalar[:, None], (len(scalar), basis.size)).astype(np.complex128)
    for v in range(basis.n_vars):
        out = out * (-c[:, v][:, None]) ** idx[None, :, v] * inv_sqrt_fact[idx[:, v]][None, :]
    return out


def fibre_vacuum_image(eps, s_batch: np.ndarray, h: HeisenbergElement, basis: MultiIndexBasis) -> np.ndarray:
    """``T_s^eps(h) 1`` for a batch of fibres ``s``; shape (N, basis.size)."""
    eps = sign_vector(eps, h.sig.p)
    s_batch = np.asarray(s_batch, dtype=np.complex128)
    w = s_batch @ h.z
    nn = s_batch @ h.n @ dagger(s_batch)
    phase = np.sum(eps * np.diagonal(nn, axis1=-2, axis2=-1).imag, axis=-1) * 1j
    return vacuum_images(eps, w, phase, basis)


def spherical_function(eps, s: np.ndarray, h: HeisenbergElement) -> complex:
    """``<T_s^eps(h) 1, 1> = exp(tr(eps s n s^*) - |s z|^2 / 2)``.

    For eps = (1, ..., 1) this is ``exp(tr(s (n - z z^*/2) s^*))``.
    """
    return complex(spherical_batch(eps, np.asarray(s)[None], h)[0])


def spherical_batch(eps, s_batch: np.ndarray, h: HeisenbergElement) -> np.ndarray:
    eps = sign_vector(eps, h.sig.p)
    s_batch = np.asarray(s_batch, dtype=np.complex128)
    nn = s_batch @ h.n @ dagger(s_batch)
    phase = np.sum(eps * np.diagonal(nn, axis1=-2, axis2=-1).imag, axis=-1)
    w2 = np.sum(np.abs(s_batch @ h.z) ** 2, axis=(-2, -1))
    return np.exp(1j * phase - 0.5 * w2)


def creation_annihilation(eps, sig: Signature, i: int, j: int, D: int) -> tuple[BargmannOperator, BargmannOperator]:
    """Ladder operators for entry ``(i, j)``: multiplication by ``x_ij`` and ``d/dx_ij``.

    ``x_ij`` is ``z_ij`` or ``conj(z_ij)`` according to ``eps_i``; on the
    monomial basis both operators have the same matrices for either sign.
    The raising operator is truncated at degree D like every other operator.
    """
    sign_vector(eps, sig.p)
    basis = make_basis(sig, D)
    m = sig.m
    if not (0 <= i < basis.sig.p and 0 <= j < m):
        raise InvalidInput(f"entry ({i}, {j}) outside a {basis.sig.p} x {m} matrix")
    v = i * m + j
    up = np.zeros((basis.size, basis.size), dtype=np.complex128)
    down = np.zeros_like(up)
    for col, k in enumerate(basis.indices):
        if k.sum() < basis.max_degree:
            kk = k.copy()
            kk[v] += 1
            up[basis.position(kk), col] = math.sqrt(k[v] + 1)
        if k[v] > 0:
            kk = k.copy()
            kk[v] -= 1
            down[basis.position(kk), col] = math.sqrt(k[v])
    return BargmannOperator(basis, up), BargmannOperator(basis, down)


def ladder_by_differences(eps, sig: Signature, i: int, j: int, D: int, t: float = 1e-4):
    """Finite-difference estimates of the ladder operators from ``rep_operator``.

    With ``dr = (T(t e_ij) - I)/t`` and ``di = (T(i t e_ij) - I)/(i t)`` one has
    ``dr -> A^- - A^+`` and ``di -> A^- + A^+`` on rows with sign +1, and
    ``di -> -(A^- + A^+)`` on rows with sign -1.  Errors are O(t).
    """
    e = sign_vector(eps, sig.p)
    one = np.eye(sig.p)
    zero_n = np.zeros((sig.p, sig.p))

    def diff(step):
        z = np.zeros((sig.p, sig.m), dtype=np.complex128)
        z[i, j] = step
        op = rep_operator(e, one, HeisenbergElement(sig, zero_n, z), D).matrix
        return (op - np.eye(op.shape[0])) / step

    dr, di = diff(t), diff(1j * t)
    if e[i] < 0:
        di = -di
    basis = make_basis(sig, D)
    return BargmannOperator(basis, 0.5 * (di - dr)), BargmannOperator(basis, 0.5 * (di + dr))


def group_law_residual(eps, s, a: HeisenbergElement, b: HeisenbergElement, D: int) -> float:
    """Max entry of ``T(a) T(b) - T(ab)`` on the degree <= D/2 block."""
    ta = rep_operator(eps, s, a, D)
    tb = rep_operator(eps, s, b, D)
    tab = rep_operator(eps, s, heis_mul(a, b), D)
    return float(np.max(np.abs((ta @ tb).block(D // 2) - tab.block(D // 2))))


def unitarity_residual(eps, s, h: HeisenbergElement, D: int) -> float:
    t = rep_operator(eps, s, h, D)
    idx = t.basis.block(D // 2)
    cols = t.matrix[:, idx]
    return float(np.max(np.abs(dagger(cols) @ cols - np.eye(len(idx)))))


# --- quadrature and commutants ------------------------------------------------

def _eval_polynomial(coeffs: np.ndarray, basis: MultiIndexBasis, eps: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_k c_k prod x^k / sqrt(k!)`` at points z of shape (N, n_vars)."""
    rows = np.repeat(eps, basis.sig.m)
    x = np.where(rows > 0, z, np.conj(z))
    idx = basis.indices
    inv_sqrt_fact = np.exp(-0.5 * np.array([math.lgamma(k + 1) for k in range(basis.max_degree + 1)]))
    mono = np.ones((z.shape[0], basis.size), dtype=np.complex128)
    for v in range(basis.n_vars):
        mono *= x[:, v][:, None] ** idx[None, :, v] * inv_sqrt_fact[idx[:, v]][None, :]
    return mono @ coeffs


def _gauss_expectation(coeffs, basis, eps, n_nodes: int) -> complex:
    nv = basis.n_vars
    if n_nodes ** (2 * nv) > 4_000_000:
        raise QuadratureUnstable(f"tensor grid with {n_nodes}^{2 * nv} nodes is too large")
    t, w = hermgauss(n_nodes)
    w = w / math.sqrt(math.pi)
    grids = np.meshgrid(*([t] * (2 * nv)), indexing="ij")
    wts = np.ones_like(grids[0]) if nv else np.ones(())
    for g in np.meshgrid(*([w] * (2 * nv)), indexing="ij"):
        wts = wts * g
    pts = np.stack([g.ravel() for g in grids], axis=1) if nv else np.zeros((1, 0))
    z = pts[:, 0::2] + 1j * pts[:, 1::2]
    return complex(np.sum(np.ravel(wts) * _eval_polynomial(coeffs, basis, eps, z)))


def vacuum_functional_check(vec: BargmannVector, eps, n_nodes: int | None = None, tol: float = 1e-8):
    """Gaussian mean of a Bargmann-space polynomial versus its value at 0.

    Uses tensor Gauss-Hermite quadrature on the real and imaginary parts of
    ``z`` with the normalised measure ``exp(-|z|^2) dz / pi^m``; the node count
    is doubled once and both rules must agree within ``tol``.

    Returns
    -------
    tuple
        ``(quadrature value, f(0))``.
    """
    basis = vec.basis
    eps = sign_vector(eps, basis.sig.p)
    n = n_nodes or basis.max_degree // 2 + 2
    q1 = _gauss_expectation(vec.coeffs, basis, eps, n)
    q2 = _gauss_expectation(vec.coeffs, basis, eps, 2 * n)
    if abs(q1 - q2) > tol * max(1.0, abs(q2)):
        raise QuadratureUnstable(f"node doubling changed the value by {abs(q1 - q2):.3e}")
    return q2, complex(vec.coeffs[0])


@dataclass(frozen=True)
class CommutantResult:
    dimension: int
    block_size: int
    smallest_singular_values: tuple[float, ...]


def commutant_scan(family, degree: int | None = None, rtol: float = COMMUTANT_RTOL) -> CommutantResult:
    """Dimension of ``{X : A X = X A for all A in family}`` on the low-degree block.

    Every operator is compressed to the basis elements of total degree <=
    ``degree`` (default D/2) before the linear system is assembled.
    """
    family = list(family)
    if not family:
        raise InvalidInput("commutant scan needs at least one operator")
    basis = family[0].basis
    deg = basis.max_degree // 2 if degree is None else degree
    blocks = [op.block(deg) for op in family]
    b = blocks[0].shape[0]
    eye = np.eye(b)
    # column-major vec: vec(AX - XA) = (I kron A - A^T kron I) vec(X)
    system = np.vstack([np.kron(eye, a) - np.kron(a.T, eye) for a in blocks])
    sv = np.linalg.svd(system, compute_uv=False)
    scale = max(sv[0] if sv.size else 0.0, 1.0)
    full = np.zeros(b * b)
    full[: sv.size] = sv[: b * b]
    dim = int(np.sum(full <= rtol * scale))
    tail = tuple(float(v) for v in np.sort(full)[: min(4, b * b)])
    return CommutantResult(dim, b, tail)
