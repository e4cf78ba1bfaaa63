"""The Iwasawa subgroup P = S x| N of U(p,q) in coordinates.

An element of P is a triple ``(s, n, z)``:

* ``s`` -- complex lower-triangular p x p with positive real diagonal,
* ``n`` -- skew-Hermitian p x p (the centre of the Heisenberg group N),
* ``z`` -- complex p x (q-p).

It is embedded as ``S(s) @ N(n, z)``, i.e. the block matrix::

    [[ s^{-*},    0,   0 ],
     [ -z^*,      e,   0 ],
     [ s zeta,   s z,  s ]]        zeta = n - z z^* / 2

S acts on N by ``(n, z) -> (s n s^*, s z)`` and ``S(s) N(h) S(s)^{-1} = N(s.h)``,
which fixes the semidirect-product law used by :func:`p_mul`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionFailed, NotPositiveDefinite, NotSkewHermitian, SignatureMismatch
from .group import GroupElement, Signature, group_inverse, is_member, MEMBERSHIP_TOL
from .linalg import as_cmatrix, cholesky_lower, dagger, skew_hermitian_part

SKEW_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


def check_s(s: np.ndarray, p: int) -> np.ndarray:
    s = as_cmatrix(s, p, p)
    if np.any(np.triu(s, 1) != 0):
        raise ValueError("s must be lower triangular")
    d = np.diagonal(s)
    if np.any(d.imag != 0) or np.any(d.real <= 0):
        raise ValueError("diagonal of s must be real and strictly positive")
    return s


@dataclass(frozen=True, eq=False)
class HeisenbergElement:
    sig: Signature
    n: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = as_cmatrix(self.n, self.sig.p, self.sig.p)
        scale = max(1.0, float(np.linalg.norm(n)))
        if np.linalg.norm(n + dagger(n)) > SKEW_TOL * scale:
            raise NotSkewHermitian("central part n must be skew-Hermitian")
        z = np.asarray(self.z, dtype=np.complex128).reshape(self.sig.p, self.sig.m)
        object.__setattr__(self, "n", _frozen(n))
        object.__setattr__(self, "z", _frozen(z))

    @classmethod
    def identity(cls, sig: Signature) -> "HeisenbergElement":
        return cls(sig, np.zeros((sig.p, sig.p)), np.zeros((sig.p, sig.m)))

    @property
    def zeta(self) -> np.ndarray:
        return self.n - 0.5 * self.z @ dagger(self.z)

    def inv(self) -> "HeisenbergElement":
        return HeisenbergElement(self.sig, -self.n, -self.z)

    def matrix(self) -> np.ndarray:
        return embed(IwasawaElement(self.sig, np.eye(self.sig.p), self.n, self.z)).m


@dataclass(frozen=True, eq=False)
class IwasawaElement:
    sig: Signature
    s: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = check_s(self.s, self.sig.p)
        h = HeisenbergElement(self.sig, self.n, self.z)
        object.__setattr__(self, "s", _frozen(s))
        object.__setattr__(self, "n", h.n)
        object.__setattr__(self, "z", h.z)

    @classmethod
    def identity(cls, sig: Signature) -> "IwasawaElement":
        return cls(sig, np.eye(sig.p), np.zeros((sig.p, sig.p)), np.zeros((sig.p, sig.m)))

    @classmethod
    def from_parts(cls, s: np.ndarray, h: HeisenbergElement) -> "IwasawaElement":
        return cls(h.sig, s, h.n, h.z)

    @property
    def h(self) -> HeisenbergElement:
        return HeisenbergElement(self.sig, self.n, self.z)

    def __matmul__(self, other: "IwasawaElement") -> "IwasawaElement":
        return p_mul(self, other)

    def inv(self) -> "IwasawaElement":
        return p_inv(self)

    def coords(self) -> np.ndarray:
        """Flat complex coordinate vector (s, n, z), used for comparisons."""
        return np.concatenate([self.s.ravel(), self.n.ravel(), self.z.ravel()])

    def distance(self, other: "IwasawaElement") -> float:
        return float(np.max(np.abs(self.coords() - other.coords()), initial=0.0))

    def is_identity(self, tol: float = 0.0) -> bool:
        return self.distance(IwasawaElement.identity(self.sig)) <= tol

    def to_dict(self) -> dict:
        def enc(a):
            return [[[float(v.real), float(v.imag)] for v in row] for row in a]

        return {"p": self.sig.p, "q": self.sig.q, "s": enc(self.s), "n": enc(self.n), "z": enc(self.z)}

    @classmethod
    def from_dict(cls, d: dict) -> "IwasawaElement":
        sig = Signature(int(d["p"]), int(d["q"]))

        def dec(a, shape):
            arr = np.array([[complex(re, im) for re, im in row] for row in a], dtype=np.complex128)
            return arr.reshape(shape)

        return cls(sig, dec(d["s"], (sig.p, sig.p)), dec(d["n"], (sig.p, sig.p)), dec(d["z"], (sig.p, sig.m)))


def _same_sig(a, b):
    if a.sig != b.sig:
        raise SignatureMismatch(f"{a.sig} vs {b.sig}")


def heis_mul(a: HeisenbergElement, b: HeisenbergElement) -> HeisenbergElement:
    """``(n1, z1)(n2, z2) = (n1 + n2 - (z1 z2^* - z2 z1^*)/2, z1 + z2)``."""
    _same_sig(a, b)
    w = a.z @ dagger(b.z)
    n = a.n + b.n - 0.5 * (w - dagger(w))
    return HeisenbergElement(a.sig, n, a.z + b.z)


def s_act(s: np.ndarray, h: HeisenbergElement) -> HeisenbergElement:
    """Automorphism of N by an element of S: ``(n, z) -> (s n s^*, s z)``."""
    s = np.asarray(s, dtype=np.complex128)
    if s.shape != (h.sig.p, h.sig.p):
        raise SignatureMismatch(f"s has shape {s.shape}, expected {(h.sig.p, h.sig.p)}")
    n = s @ h.n @ dagger(s)
    # keep exact skew-Hermitian form against rounding
    return HeisenbergElement(h.sig, skew_hermitian_part(n), s @ h.z)


def s_inv(s: np.ndarray) -> np.ndarray:
    """Inverse of a lower-triangular matrix, cleaned to stay lower triangular."""
    si = np.linalg.inv(s)
    si = np.tril(si)
    si[np.diag_indices_from(si)] = 1.0 / np.diagonal(s).real
    return si


def p_mul(a: IwasawaElement, b: IwasawaElement) -> IwasawaElement:
    """Product in P: ``(s1, h1)(s2, h2) = (s1 s2, (s2^{-1}.h1) h2)``."""
    _same_sig(a, b)
    s = np.tril(a.s @ b.s)
    s[np.diag_indices_from(s)] = np.diagonal(s).real
    h = heis_mul(s_act(s_inv(b.s), a.h), b.h)
    return IwasawaElement.from_parts(s, h)


def p_inv(a: IwasawaElement) -> IwasawaElement:
    h = s_act(a.s, a.h.inv())
    return IwasawaElement.from_parts(s_inv(a.s), h)


def embed(a: IwasawaElement) -> GroupElement:
    sig = a.sig
    b1, b2, b3 = sig.blocks()
    g = np.zeros((sig.n, sig.n), dtype=np.complex128)
    g[b1, b1] = dagger(s_inv(a.s))
    g[b2, b1] = -dagger(a.z)
    g[b2, b2] = np.eye(sig.m)
    zeta = a.n - 0.5 * a.z @ dagger(a.z)
    g[b3, b1] = a.s @ zeta
    g[b3, b2] = a.s @ a.z
    g[b3, b3] = a.s
    return GroupElement(sig, g)


def iwasawa_decompose(g: GroupElement, tol: float = MEMBERSHIP_TOL) -> tuple[IwasawaElement, GroupElement]:
    """Factor ``g = embed(p) @ k`` with ``p`` in P and ``k`` in K.

    ``p`` is read off from ``g g^* = p p^*`` block by block:
    ``s s^* = (M_11)^{-1}``, ``z = -s^* M_12``, ``zeta = s^{-1} M_31 s``.
    Then ``k = p^{-1} g`` with the group inverse.

    Raises
    ------
    DecompositionFailed
        If ``M_11`` is not positive definite or the recovered central part is
        not skew-Hermitian, both of which mean ``g`` is not in U(p,q).
    """
    sig = g.sig
    b1, b2, b3 = sig.blocks()
    m = g.m @ dagger(g.m)
    m11 = 0.5 * (m[b1, b1] + dagger(m[b1, b1]))
    try:
        s = cholesky_lower(np.linalg.inv(m11), herm_tol=1e-8)
    except (NotPositiveDefinite, np.linalg.LinAlgError) as exc:
        raise DecompositionFailed(f"top-left block of g g^* is not positive definite: {exc}") from None
    z = -dagger(s) @ m[b1, b2]
    zeta = s_inv(s) @ m[b3, b1] @ s
    n = zeta + 0.5 * z @ dagger(z)
    scale = max(1.0, float(np.linalg.norm(n)))
    if np.linalg.norm(n + dagger(n)) > 1e3 * tol * scale:
        raise DecompositionFailed("recovered central part is not skew-Hermitian; g is not in U(p,q)")
    p_elem = IwasawaElement(sig, s, skew_hermitian_part(n), z)
    k = group_inverse(embed(p_elem).m, sig) @ g.m
    if np.linalg.norm(k @ dagger(k) - np.eye(sig.n)) > 1e3 * tol * max(1.0, float(np.linalg.norm(g.m)) ** 2):
        raise DecompositionFailed("compact factor is not unitary; g is not in U(p,q)")
    return p_elem, GroupElement(sig, k)


def k_conjugate(k: GroupElement, a: IwasawaElement) -> tuple[IwasawaElement, GroupElement]:
    """Solve ``k p = p' k'`` for ``p'`` in P and ``k'`` in K."""
    return iwasawa_decompose(k @ embed(a))


def random_s(sig: Signature, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    p = sig.p
    s = np.zeros((p, p), dtype=np.complex128)
    il = np.tril_indices(p, -1)
    s[il] = scale * (rng.standard_normal(len(il[0])) + 1j * rng.standard_normal(len(il[0]))) / np.sqrt(2)
    s[np.diag_indices(p)] = np.exp(scale * rng.standard_normal(p))
    return s


def random_heisenberg(sig: Signature, rng: np.random.Generator, scale: float = 0.5) -> HeisenbergElement:
    p, m = sig.p, sig.m
    a = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    n = scale * skew_hermitian_part(a)
    z = scale * (rng.standard_normal((p, m)) + 1j * rng.standard_normal((p, m))) / np.sqrt(2)
    return HeisenbergElement(sig, n, z)


def random_iwasawa(sig: Signature, rng: np.random.Generator, scale: float = 0.5) -> IwasawaElement:
    return IwasawaElement.from_parts(random_s(sig, rng, scale), random_heisenberg(sig, rng, scale))


def random_group(sig: Signature, rng: np.random.Generator, scale: float = 0.5) -> GroupElement:
    from .group import random_compact

    return embed(random_iwasawa(sig, rng, scale)) @ random_compact(sig, rng)


def block_relations_hold(a: IwasawaElement, tol: float = 1e-10) -> bool:
    return all(v <= tol for v in is_member(embed(a), a.sig).blocks.values())
