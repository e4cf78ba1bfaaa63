"""The group U(p,q) in block coordinates.

Matrices are split into blocks of orders p, q-p, p.  The group is cut out by
``g @ sigma @ g^* == sigma`` where ``sigma`` is block anti-diagonal::

    sigma = [[0, 0, e_p],
             [0, e_{q-p}, 0],
             [e_p, 0, 0]]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, InvalidInput, SignatureMismatch
from .linalg import as_cmatrix, dagger, map_matrix, numerical_rank

MEMBERSHIP_TOL = 1e-8

PATTERNS = ("full", "heisenberg", "iwasawa", "compact")


@dataclass(frozen=True)
class Signature:
    p: int
    q: int

    def __post_init__(self):
        if not (isinstance(self.p, (int, np.integer)) and isinstance(self.q, (int, np.integer))):
            raise InvalidInput("p and q must be integers")
        if not 1 <= self.p <= self.q:
            raise InvalidInput(f"need q >= p >= 1, got p={self.p}, q={self.q}")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def m(self) -> int:
        """Order of the middle block, q - p."""
        return self.q - self.p

    def blocks(self) -> tuple[slice, slice, slice]:
        p, q = self.p, self.q
        return slice(0, p), slice(p, q), slice(q, q + p)


@dataclass(frozen=True, eq=False)
class GroupElement:
    sig: Signature
    m: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = as_cmatrix(self.m, self.sig.n, self.sig.n)
        a.setflags(write=False)
        object.__setattr__(self, "m", a)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.sig != self.sig:
            raise SignatureMismatch(f"{self.sig} vs {other.sig}")
        return GroupElement(self.sig, self.m @ other.m)

    def inv(self) -> "GroupElement":
        return GroupElement(self.sig, group_inverse(self.m, self.sig))

    @classmethod
    def identity(cls, sig: Signature) -> "GroupElement":
        return cls(sig, np.eye(sig.n))


@lru_cache(maxsize=None)
def _sigma_cached(p: int, q: int) -> np.ndarray:
    n = p + q
    s = np.zeros((n, n), dtype=np.complex128)
    for i in range(p):
        s[i, q + i] = 1.0
        s[q + i, i] = 1.0
    for j in range(p, q):
        s[j, j] = 1.0
    s.setflags(write=False)
    return s


def sigma(sig: Signature) -> np.ndarray:
    return _sigma_cached(sig.p, sig.q)


def group_inverse(g: np.ndarray, sig: Signature) -> np.ndarray:
    """Inverse on the group, ``sigma g^* sigma``; no factorization involved."""
    s = sigma(sig)
    return s @ dagger(np.asarray(g)) @ s


@dataclass(frozen=True)
class Membership:
    ok: bool
    residual: float
    blocks: dict

    def __bool__(self):
        return self.ok


_BLOCK_NAMES = ("11", "12", "13", "22", "23", "33")


def is_member(g, sig: Signature, tol: float = MEMBERSHIP_TOL) -> Membership:
    """Check ``g sigma g^* == sigma`` in Frobenius norm.

    The six independent block residuals (upper triangle of the Hermitian
    defect) are returned alongside the total.
    """
    if isinstance(g, GroupElement):
        g = g.m
    g = as_cmatrix(g)
    if g.shape != (sig.n, sig.n):
        raise DimensionMismatch(f"expected {(sig.n, sig.n)}, got {g.shape}")
    s = sigma(sig)
    defect = g @ s @ dagger(g) - s
    b = sig.blocks()
    blocks = {}
    for name in _BLOCK_NAMES:
        i, j = int(name[0]) - 1, int(name[1]) - 1
        blk = defect[b[i], b[j]]
        blocks[name] = float(np.linalg.norm(blk)) if blk.size else 0.0
    res = float(np.linalg.norm(defect))
    return Membership(res <= tol, res, blocks)


@lru_cache(maxsize=None)
def _sigma_eigenbasis(p: int, q: int) -> np.ndarray:
    # columns: p eigenvectors for -1 followed by q eigenvectors for +1
    w, v = np.linalg.eigh(_sigma_cached(p, q))
    order = np.argsort(w, kind="stable")
    v = v[:, order]
    v.setflags(write=False)
    return v


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    qm, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return qm * (d / np.abs(d))


def random_compact(sig: Signature, rng: np.random.Generator) -> GroupElement:
    """Random element of the maximal compact subgroup ``U(p) x U(q)``.

    Drawn as a block-diagonal unitary in the eigenbasis of ``sigma`` and
    conjugated back, so it is unitary and commutes with ``sigma``.
    """
    c = _sigma_eigenbasis(sig.p, sig.q)
    blk = np.zeros((sig.n, sig.n), dtype=np.complex128)
    blk[: sig.p, : sig.p] = random_unitary(sig.p, rng)
    blk[sig.p :, sig.p :] = random_unitary(sig.q, rng)
    return GroupElement(sig, c @ blk @ dagger(c))


def involution_w(sig: Signature) -> GroupElement:
    return GroupElement(sig, sigma(sig))


def is_compact(g, sig: Signature, tol: float = MEMBERSHIP_TOL) -> bool:
    if isinstance(g, GroupElement):
        g = g.m
    g = np.asarray(g)
    return bool(
        np.linalg.norm(g @ dagger(g) - np.eye(sig.n)) <= tol and is_member(g, sig, tol).ok
    )


def _pattern_constraints(sig: Signature, pattern: str):
    """Linear maps whose common kernel is the pattern subspace of gl(n, C)."""
    b = sig.blocks()
    cons = []
    if pattern == "full":
        pass
    elif pattern == "compact":
        cons.append(lambda x: x + dagger(x))
    elif pattern == "heisenberg":
        for i, j in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)):
            cons.append(lambda x, i=i, j=j: x[b[i], b[j]])
    elif pattern == "iwasawa":
        for i, j in ((0, 1), (0, 2), (1, 1), (1, 2)):
            cons.append(lambda x, i=i, j=j: x[b[i], b[j]])
        # bottom-right block: lower triangular with real diagonal
        cons.append(lambda x: np.triu(x[b[2], b[2]], 1))
        cons.append(lambda x: np.diagonal(x[b[2], b[2]]).imag)
        # top-left block: upper triangular
        cons.append(lambda x: np.tril(x[b[0], b[0]], -1))
    else:
        raise InvalidInput(f"unknown pattern {pattern!r}; expected one of {PATTERNS}")
    return cons


def lie_algebra_dimension(sig: Signature, pattern: str = "full") -> int:
    """Real dimension of ``{X : X sigma + sigma X^* = 0}`` cut by ``pattern``.

    Computed as ``2 n^2`` minus the numerical rank of the stacked real
    constraint system, so the answer is an exact integer.
    """
    n = sig.n
    s = sigma(sig)
    cons = [lambda x: x @ s + s @ dagger(x)] + _pattern_constraints(sig, pattern)

    def apply(v):
        x = (v[: n * n] + 1j * v[n * n :]).reshape(n, n)
        out = []
        for c in cons:
            y = np.asarray(c(x))
            if np.iscomplexobj(y):
                out.extend([y.real.ravel(), y.imag.ravel()])
            else:
                out.append(y.ravel())
        return np.concatenate(out)

    a = map_matrix(apply, 2 * n * n)
    return 2 * n * n - numerical_rank(a)


def expected_dimension(sig: Signature, pattern: str) -> int:
    """Closed-form counts: (p+q)^2, p(2q-p), 2pq, p^2+q^2."""
    p, q = sig.p, sig.q
    return {
        "full": (p + q) ** 2,
        "heisenberg": p * (2 * q - p),
        "iwasawa": 2 * p * q,
        "compact": p * p + q * q,
    }[pattern]
