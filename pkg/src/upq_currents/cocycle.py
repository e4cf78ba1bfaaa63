"""The special representation of P, its 1-cocycle and the extension to U(p,q).

Vectors of the direct integral are functions ``s -> K^eps``.  P acts by

    (T(s0, h) F)(s) = T_{s s0}(h) F(s s0),

and the cocycle is ``b(p) = T(p) F0 - F0`` with ``F0(s) = f(s) 1``,
``f(s) = exp(-|s|^2 / 2)``.  Because ``T_{s}(h) 1`` is a coherent state,
every fibre value of ``b(p)`` is a combination of two coherent states and the
fibre inner products are available in closed form.

The space spanned by the ``b(p)`` is modelled formally: a
:class:`CocycleCombination` is a finite sum ``sum lambda_i b(p_i)``.  P acts by
``b(p) -> b(g p) - b(g)``, K by ``b(p) -> b(p')`` where ``k p = p' k'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .bargmann import BargmannVector, make_basis, rep_operator
from .characters import all_plus, sign_vector
from .errors import InvalidInput, NonFinite, SignatureMismatch
from .group import GroupElement, Signature
from .iwasawa import IwasawaElement, iwasawa_decompose, k_conjugate, p_mul
from .linalg import dagger
from .measures import Estimate, MeasureOnS, Window, gaussian_weight, s_norm2

MERGE_TOL = 1e-8


# --- fibre values -------------------------------------------------------------

def reference_weight(s: np.ndarray) -> np.ndarray:
    return gaussian_weight(s)


def cocycle_fiber(p: IwasawaElement, s: np.ndarray, eps=None, D: int = 10) -> BargmannVector:
    """``b(p)(s) = f(s s0) T_{s s0}(h) 1 - f(s) 1`` truncated at degree D."""
    if D < 4:
        raise InvalidInput("cocycle fibres need D >= 4")
    eps = all_plus(p.sig.p) if eps is None else sign_vector(eps, p.sig.p)
    s = np.asarray(s, dtype=np.complex128)
    ss0 = s @ p.s
    t = rep_operator(eps, ss0, p.h, D)
    coeffs = float(reference_weight(ss0)) * t.matrix[:, 0]
    coeffs[0] -= float(reference_weight(s))
    return BargmannVector(t.basis, coeffs)


def _coherent_params(eps, p: IwasawaElement, s_batch: np.ndarray):
    """Log-amplitude and creation parameters of ``f(s s0) T_{s s0}(h) 1``."""
    ss0 = s_batch @ p.s
    w = (ss0 @ p.z).reshape(len(s_batch), -1)
    nn = ss0 @ p.n @ dagger(ss0)
    phase = np.sum(eps * np.diagonal(nn, axis1=-2, axis2=-1).imag, axis=-1)
    logamp = -0.5 * s_norm2(ss0) - 0.5 * np.sum(np.abs(w) ** 2, axis=1) + 1j * phase
    rows = np.repeat(eps, p.sig.m)
    c = np.where(rows > 0, np.conj(w), w)
    return logamp, c


def cocycle_fiber_closed(p: IwasawaElement, s: np.ndarray, eps=None, D: int = 10) -> BargmannVector:
    """Direct formula for the fibre value.

    Coefficient at ``k`` is ``exp(tr(eps s a s^*)) prod (-c_v)^{k_v}/sqrt(k_v!)``
    minus ``f(s)`` at the vacuum, with ``a = s0 (n0 - z0 z0^*/2 - 1/2) s0^*``
    (for mixed signs the ``n0`` part carries ``eps``) and ``c`` built from
    ``w = s s0 z0``.
    """
    eps = all_plus(p.sig.p) if eps is None else sign_vector(eps, p.sig.p)
    basis = make_basis(p.sig, D)
    s = np.asarray(s, dtype=np.complex128)[None]
    logamp, c = _coherent_params(eps, p, s)
    k = basis.indices
    lf = np.array([math.lgamma(v + 1) for v in range(D + 1)])
    coeffs = np.exp(logamp[0]) * np.prod((-c[0][None, :]) ** k * np.exp(-0.5 * lf[k]), axis=1)
    coeffs[0] -= float(reference_weight(s[0]))
    return BargmannVector(basis, coeffs)


def fiber_inner_products(ps: Sequence[IwasawaElement], s_batch: np.ndarray, eps=None) -> np.ndarray:
    """Exact ``<b(p_j)(s), b(p_k)(s)>`` in the untruncated fibre; shape (N, J, J).

    Uses ``<e(c), e(c')> = exp(sum c conj(c'))`` for the unnormalised coherent
    vectors ``e(c)_k = prod (-c_v)^{k_v} / sqrt(k_v!)``.
    """
    if not ps:
        raise InvalidInput("need at least one generator")
    sig = ps[0].sig
    eps = all_plus(sig.p) if eps is None else sign_vector(eps, sig.p)
    s_batch = np.asarray(s_batch, dtype=np.complex128)
    la, cs = zip(*(_coherent_params(eps, p, s_batch) for p in ps))
    la = np.stack(la, axis=1)                  # (N, J)
    cs = np.stack(cs, axis=1)                  # (N, J, V)
    f0 = reference_weight(s_batch)[:, None]    # (N, 1)
    cross = np.einsum("njv,nkv->njk", cs, np.conj(cs))
    coh = np.exp(la[:, :, None] + np.conj(la)[:, None, :] + cross)
    amp = np.exp(la)
    return coh - amp[:, :, None] * f0[:, :, None] - f0[:, :, None] * np.conj(amp)[:, None, :] + (f0**2)[:, :, None]


def apply_p_fiber(g: IwasawaElement, F: Callable[[np.ndarray], BargmannVector], s: np.ndarray, eps, D: int) -> BargmannVector:
    """``(T(g) F)(s) = T_{s s0}(h) F(s s0)`` with the truncated fibre operator."""
    ss0 = np.asarray(s) @ g.s
    t = rep_operator(eps, ss0, g.h, D)
    return t @ F(ss0)


def cocycle_identity_residual(g1: IwasawaElement, g2: IwasawaElement, s: np.ndarray, eps=None, D: int = 10) -> float:
    """``|| b(g1 g2)(s) - (T(g1) b(g2))(s) - b(g1)(s) ||`` evaluated on the fibre."""
    eps = all_plus(g1.sig.p) if eps is None else sign_vector(eps, g1.sig.p)
    lhs = cocycle_fiber(p_mul(g1, g2), s, eps, D)
    mid = apply_p_fiber(g1, lambda x: cocycle_fiber(g2, x, eps, D), s, eps, D)
    rhs = cocycle_fiber(g1, s, eps, D)
    return (lhs - mid - rhs).norm()


# --- Gram matrices -------------------------------------------------------------

def _key(p: IwasawaElement) -> tuple:
    return tuple(np.round(p.coords(), 12).tolist())


@dataclass
class GramCache:
    """Estimated ``<b(p_j), b(p_k)>`` keyed by rounded generator coordinates."""

    entries: dict = field(default_factory=dict)

    def get(self, a: IwasawaElement, b: IwasawaElement):
        ka, kb = _key(a), _key(b)
        if (ka, kb) in self.entries:
            return self.entries[(ka, kb)]
        if (kb, ka) in self.entries:
            est = self.entries[(kb, ka)]
            return Estimate(np.conj(est.value), est.std_error, est.n_samples, est.seed, est.ess)
        return None

    def put(self, a: IwasawaElement, b: IwasawaElement, est: Estimate):
        self.entries[(_key(a), _key(b))] = est


@dataclass(frozen=True)
class GramResult:
    matrix: np.ndarray
    std_error: np.ndarray
    n_samples: int
    seed: int
    min_eigenvalue: float
    min_eigenvalue_se: float
    eigenvalues: np.ndarray

    def to_dict(self) -> dict:
        return {
            "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
            "std_error": self.std_error.tolist(),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "min_eigenvalue": self.min_eigenvalue,
            "min_eigenvalue_se": self.min_eigenvalue_se,
            "eigenvalues": [float(v) for v in self.eigenvalues],
        }


def gram_matrix(
    ps: Sequence[IwasawaElement],
    nu: MeasureOnS,
    eps=None,
    window: Window = Window(),
    n_samples: int = 20000,
    seed: int = 0,
    cache: GramCache | None = None,
) -> GramResult:
    """Monte Carlo Gram matrix of ``b(p_1), ..., b(p_J)`` over ``nu``.

    All entries share one sample of ``s``, so the estimate is positive
    semidefinite.  The smallest eigenvalue carries a first-order standard
    error from the per-sample values of ``u^* M_i u``.
    """
    rng = np.random.default_rng(seed)
    pts, logw = nu.sample(rng, n_samples, window)
    w = np.exp(logw)
    per = fiber_inner_products(ps, pts, eps) * w[:, None, None]
    if not np.all(np.isfinite(per)):
        raise NonFinite("non-finite fibre inner products")
    g = per.mean(axis=0)
    g = 0.5 * (g + dagger(g))
    se = per.std(axis=0, ddof=1) / math.sqrt(n_samples)
    vals, vecs = np.linalg.eigh(g)
    u = vecs[:, 0]
    q = np.einsum("j,njk,k->n", np.conj(u), per, u).real
    lam_se = float(q.std(ddof=1) / math.sqrt(n_samples))
    if cache is not None:
        for j, a in enumerate(ps):
            for k, b in enumerate(ps):
                cache.put(a, b, Estimate(complex(g[j, k]), float(se[j, k]), n_samples, seed))
    return GramResult(g, se, n_samples, seed, float(vals[0]), lam_se, vals)


def gram(p1: IwasawaElement, p2: IwasawaElement, nu: MeasureOnS, eps=None, window: Window = Window(),
         n_samples: int = 20000, seed: int = 0, cache: GramCache | None = None) -> Estimate:
    """Single Gram entry ``<b(p1), b(p2)>`` with its standard error."""
    if cache is not None:
        hit = cache.get(p1, p2)
        if hit is not None:
            return hit
    res = gram_matrix([p1, p2], nu, eps, window, n_samples, seed, cache)
    return Estimate(complex(res.matrix[0, 1]), float(res.std_error[0, 1]), n_samples, seed)


def injectivity_evidence(ps: Sequence[IwasawaElement], nu: MeasureOnS, eps=None, window: Window = Window(),
                         n_samples: int = 20000, seed: int = 0) -> GramResult:
    return gram_matrix(ps, nu, eps, window, n_samples, seed)


def translation_norm_closed(s0: float) -> float:
    """``int_0^inf (exp(-s0^2 r^2/2) - exp(-r^2/2))^2 dr / r`` for p = 1."""
    return 0.5 * math.log((s0 * s0 + 1.0) ** 2 / (4.0 * s0 * s0))


# --- formal combinations -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CocycleCombination:
    """Finite formal sum ``sum lambda_i b(p_i)`` with distinct, non-identity ``p_i``."""

    sig: Signature
    terms: tuple = ()

    @classmethod
    def generator(cls, p: IwasawaElement, coeff: complex = 1.0) -> "CocycleCombination":
        return cls.build(p.sig, [(coeff, p)])

    @classmethod
    def zero(cls, sig: Signature) -> "CocycleCombination":
        return cls(sig, ())

    @classmethod
    def build(cls, sig: Signature, pairs: Iterable[tuple[complex, IwasawaElement]], tol: float = MERGE_TOL):
        merged: list[list] = []
        for coeff, p in pairs:
            if p.sig != sig:
                raise SignatureMismatch(f"{p.sig} vs {sig}")
            if p.is_identity(tol):
                continue  # b(e) = 0
            for item in merged:
                if item[1].distance(p) <= tol:
                    item[0] += complex(coeff)
                    break
            else:
                merged.append([complex(coeff), p])
        terms = tuple((c, p) for c, p in merged if abs(c) > tol)
        return cls(sig, terms)

    def __add__(self, other: "CocycleCombination") -> "CocycleCombination":
        return CocycleCombination.build(self.sig, list(self.terms) + list(other.terms))

    def __sub__(self, other: "CocycleCombination") -> "CocycleCombination":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "CocycleCombination":
        return CocycleCombination(self.sig, tuple((c * a, p) for a, p in self.terms))

    def __len__(self):
        return len(self.terms)

    def is_zero(self, tol: float = MERGE_TOL) -> bool:
        return all(abs(c) <= tol for c, _ in self.terms)

    def equals(self, other: "CocycleCombination", tol: float = MERGE_TOL) -> bool:
        return (self - other).is_zero(tol)

    def fiber(self, s: np.ndarray, eps=None, D: int = 10) -> BargmannVector:
        basis = make_basis(self.sig, D)
        out = BargmannVector(basis, np.zeros(basis.size))
        for c, p in self.terms:
            out = out + c * cocycle_fiber(p, s, eps, D)
        return out

    def to_dict(self) -> dict:
        return {
            "p": self.sig.p,
            "q": self.sig.q,
            "terms": [{"coeff": [c.real, c.imag], "generator": p.to_dict()} for c, p in self.terms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CocycleCombination":
        sig = Signature(int(d["p"]), int(d["q"]))
        return cls.build(sig, [(complex(*t["coeff"]), IwasawaElement.from_dict(t["generator"])) for t in d["terms"]])


def act_iwasawa(g: IwasawaElement, v: CocycleCombination) -> CocycleCombination:
    """``b(p) -> b(g p) - b(g)`` extended linearly."""
    pairs = []
    for c, p in v.terms:
        pairs.append((c, p_mul(g, p)))
        pairs.append((-c, g))
    return CocycleCombination.build(v.sig, pairs)


def act_compact(k: GroupElement, v: CocycleCombination) -> CocycleCombination:
    """``b(p) -> b(p')`` where ``k p = p' k'``."""
    if np.linalg.norm(k.m @ dagger(k.m) - np.eye(k.sig.n)) > 1e-8:
        raise InvalidInput("compact action needs a unitary element")
    return CocycleCombination.build(v.sig, [(c, k_conjugate(k, p)[0]) for c, p in v.terms])


def act_group(g: GroupElement, v: CocycleCombination) -> CocycleCombination:
    """Factor ``g = p_g k_g`` and apply the K-action, then the P-action."""
    pg, kg = iwasawa_decompose(g)
    return act_iwasawa(pg, act_compact(kg, v))


def extended_cocycle(g: GroupElement) -> CocycleCombination:
    """``B(p k) = b(p)``; in particular ``B(k) = 0``."""
    pg, _ = iwasawa_decompose(g)
    return CocycleCombination.generator(pg)


def s_translation(sig: Signature, s0: np.ndarray) -> IwasawaElement:
    """Pure S element ``(s0, 0, 0)``."""
    return IwasawaElement(sig, s0, np.zeros((sig.p, sig.p)), np.zeros((sig.p, sig.m)))

