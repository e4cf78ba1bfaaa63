"""Step currents X = [0, 1) -> G and their action on configurations.

A :class:`StepCurrent` is piecewise constant on ``[t_i, t_{i+1})``.  Three
variants share the type: ``iwasawa`` (values in P), ``group`` (values in
U(p,q)) and ``compact`` (values in K).

The vacuum is the factorised vector with fibre ``exp(-|s|^2/2) 1`` at every
point, paired against the Poisson process of intensity ``exp(-|s|^2) mu``.
For ``g(x) = (s0, h)`` one point ``(s, x)`` contributes

    G(s, x) = exp(-|s s0|^2/2 + |s|^2/2) * phi_{s s0}(h),

so the matrix coefficient is ``Phi(g) = E[prod G]`` and, in closed form,
``exp(int (G - 1) e^{-|s|^2} dmu)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate as sp_integrate

from .bargmann import rep_operator, spherical_batch
from .characters import all_plus, sign_vector
from .errors import InvalidInput, NonFinite, SignatureMismatch, VariantMismatch
from .group import GroupElement, Signature, is_compact, is_member
from .iwasawa import IwasawaElement, iwasawa_decompose, k_conjugate, p_mul
from .measures import Estimate, Window, s_norm2
from .quasi_poisson import Configuration, QPTriple, sample_configurations, square_triple

VARIANTS = ("iwasawa", "group", "compact")
MERGE_TOL = 1e-8


def _value_distance(a, b) -> float:
    if isinstance(a, IwasawaElement):
        return a.distance(b)
    return float(np.max(np.abs(a.m - b.m)))


def _identity(variant: str, sig: Signature):
    return IwasawaElement.identity(sig) if variant == "iwasawa" else GroupElement.identity(sig)


@dataclass(frozen=True, eq=False)
class StepCurrent:
    """Piecewise-constant map ``[0, 1) -> G``; ``breaks`` runs from 0 to 1."""

    sig: Signature
    variant: str
    breaks: tuple[float, ...]
    values: tuple = field(repr=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidInput(f"unknown variant {self.variant!r}")
        b = tuple(float(v) for v in self.breaks)
        if len(b) < 2 or b[0] != 0.0 or b[-1] != 1.0 or any(x >= y for x, y in zip(b, b[1:])):
            raise InvalidInput("breakpoints must increase strictly from 0 to 1")
        if len(self.values) != len(b) - 1:
            raise InvalidInput("need one value per piece")
        for v in self.values:
            if v.sig != self.sig:
                raise SignatureMismatch(f"{v.sig} vs {self.sig}")
            if self.variant == "iwasawa" and not isinstance(v, IwasawaElement):
                raise VariantMismatch("iwasawa currents take IwasawaElement values")
            if self.variant != "iwasawa" and not isinstance(v, GroupElement):
                raise VariantMismatch(f"{self.variant} currents take GroupElement values")
            if self.variant == "group" and not is_member(v, self.sig):
                raise InvalidInput("value is not in U(p,q)")
            if self.variant == "compact" and not is_compact(v, self.sig):
                raise InvalidInput("value is not in the compact subgroup")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", tuple(self.values))

    @classmethod
    def constant(cls, value, variant: str | None = None) -> "StepCurrent":
        variant = variant or ("iwasawa" if isinstance(value, IwasawaElement) else "group")
        return cls(value.sig, variant, (0.0, 1.0), (value,))

    @classmethod
    def identity(cls, sig: Signature, variant: str = "iwasawa") -> "StepCurrent":
        return cls.constant(_identity(variant, sig), variant)

    @classmethod
    def supported_on(cls, value, lo: float, hi: float, variant: str | None = None) -> "StepCurrent":
        """``value`` on ``[lo, hi)`` and the identity elsewhere."""
        variant = variant or ("iwasawa" if isinstance(value, IwasawaElement) else "group")
        e = _identity(variant, value.sig)
        breaks, vals = [0.0], []
        if lo > 0:
            breaks.append(lo)
            vals.append(e)
        breaks.append(hi)
        vals.append(value)
        if hi < 1:
            breaks.append(1.0)
            vals.append(e)
        return cls(value.sig, variant, tuple(breaks), tuple(vals))

    @property
    def n_pieces(self) -> int:
        return len(self.values)

    def pieces(self):
        return [(lo, hi, v) for lo, hi, v in zip(self.breaks, self.breaks[1:], self.values)]

    def piece_index(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, self.n_pieces - 1)

    def value_at(self, x: float):
        return self.values[int(self.piece_index(np.array([x]))[0])]

    def refine(self, breaks: Sequence[float]) -> "StepCurrent":
        new = tuple(sorted(set(self.breaks) | set(float(b) for b in breaks)))
        vals = tuple(self.value_at(0.5 * (lo + hi)) for lo, hi in zip(new, new[1:]))
        return StepCurrent(self.sig, self.variant, new, vals)

    def canonical(self, tol: float = MERGE_TOL) -> "StepCurrent":
        """Merge adjacent pieces with equal values."""
        breaks, vals = [0.0], [self.values[0]]
        for hi_lo, v in zip(self.breaks[1:-1], self.values[1:]):
            if _value_distance(v, vals[-1]) <= tol:
                continue
            breaks.append(hi_lo)
            vals.append(v)
        breaks.append(1.0)
        return StepCurrent(self.sig, self.variant, tuple(breaks), tuple(vals))

    def is_identity(self, tol: float = MERGE_TOL) -> bool:
        e = _identity(self.variant, self.sig)
        return all(_value_distance(v, e) <= tol for v in self.values)

    def distance(self, other: "StepCurrent") -> float:
        """Sup distance of values over the common refinement."""
        a, b = _common(self, other)
        return max(_value_distance(u, v) for u, v in zip(a.values, b.values))

    def support(self, tol: float = MERGE_TOL) -> list[tuple[float, float]]:
        e = _identity(self.variant, self.sig)
        return [(lo, hi) for lo, hi, v in self.pieces() if _value_distance(v, e) > tol]

    def __matmul__(self, other: "StepCurrent") -> "StepCurrent":
        return current_mul(self, other)

    def inv(self) -> "StepCurrent":
        return current_inv(self)

    def s_field(self):
        """``x -> s(x)`` as a batch of matrices (iwasawa variant)."""
        if self.variant != "iwasawa":
            raise VariantMismatch("only iwasawa currents have an S-part")
        stack = np.stack([v.s for v in self.values])
        return lambda x: stack[self.piece_index(np.asarray(x))]

    def to_list(self) -> list[dict]:
        out = []
        for lo, hi, v in self.pieces():
            if isinstance(v, IwasawaElement):
                val = v.to_dict()
            else:
                val = [[[float(c.real), float(c.imag)] for c in row] for row in v.m]
            out.append({"from": lo, "to": hi, "value": val})
        return out

    @classmethod
    def from_list(cls, sig: Signature, variant: str, items: list[dict]) -> "StepCurrent":
        breaks = [float(items[0]["from"])] + [float(it["to"]) for it in items]
        vals = []
        for it in items:
            if variant == "iwasawa":
                vals.append(IwasawaElement.from_dict(it["value"]))
            else:
                m = np.array([[complex(re, im) for re, im in row] for row in it["value"]])
                vals.append(GroupElement(sig, m))
        return cls(sig, variant, tuple(breaks), tuple(vals))


def _common(a: StepCurrent, b: StepCurrent) -> tuple[StepCurrent, StepCurrent]:
    if a.sig != b.sig:
        raise SignatureMismatch(f"{a.sig} vs {b.sig}")
    if a.variant != b.variant:
        raise VariantMismatch(f"{a.variant} vs {b.variant}")
    return a.refine(b.breaks), b.refine(a.breaks)


def current_mul(a: StepCurrent, b: StepCurrent) -> StepCurrent:
    """Pointwise product on the common refinement."""
    ra, rb = _common(a, b)
    if a.variant == "iwasawa":
        vals = tuple(p_mul(u, v) for u, v in zip(ra.values, rb.values))
    else:
        vals = tuple(u @ v for u, v in zip(ra.values, rb.values))
    return StepCurrent(a.sig, a.variant, ra.breaks, vals)


def current_inv(a: StepCurrent) -> StepCurrent:
    return StepCurrent(a.sig, a.variant, a.breaks, tuple(v.inv() for v in a.values))


def random_current(sig: Signature, rng: np.random.Generator, variant: str = "iwasawa", max_pieces: int = 4,
                   scale: float = 0.5, lo: float = 0.0, hi: float = 1.0) -> StepCurrent:
    """Random step current supported on ``[lo, hi)`` with at most ``max_pieces`` pieces there."""
    from .group import random_compact
    from .iwasawa import random_group, random_iwasawa

    k = int(rng.integers(1, max_pieces + 1))
    inner = np.sort(rng.uniform(lo, hi, size=k - 1)) if k > 1 else np.array([])
    cuts = [lo] + [float(c) for c in inner] + [hi]
    draw = {
        "iwasawa": lambda: random_iwasawa(sig, rng, scale),
        "group": lambda: random_group(sig, rng, scale),
        "compact": lambda: random_compact(sig, rng),
    }[variant]
    e = _identity(variant, sig)
    breaks, vals = [0.0], []
    if lo > 0:
        breaks.append(lo)
        vals.append(e)
    for c_hi in cuts[1:]:
        breaks.append(c_hi)
        vals.append(draw())
    if hi < 1:
        breaks.append(1.0)
        vals.append(e)
    return StepCurrent(sig, variant, tuple(breaks), tuple(vals))


# --- vacuum pairing ----------------------------------------------------------------

def vacuum_triple(p: int, window: Window = Window()) -> QPTriple:
    """The triple with ``u = |s|^2``, for which the vacuum has norm one."""
    return square_triple(p, window)


def point_factors(g: StepCurrent, s: np.ndarray, x: np.ndarray, eps=None, D: int | None = None) -> np.ndarray:
    """Per-point factors ``G(s, x)`` of the vacuum pairing.

    With ``D`` given the Heisenberg part is taken from the truncated fibre
    operator instead of the closed-form spherical function.
    """
    if g.variant != "iwasawa":
        raise VariantMismatch("vacuum pairing needs an iwasawa current")
    eps = all_plus(g.sig.p) if eps is None else sign_vector(eps, g.sig.p)
    s = np.asarray(s, dtype=np.complex128)
    out = np.ones(len(x), dtype=np.complex128)
    idx = g.piece_index(np.asarray(x))
    for j, v in enumerate(g.values):
        m = idx == j
        if np.any(m):
            out[m] = _piece_factor(v, s[m], eps, D)
    return out


def _piece_factor(v: IwasawaElement, s: np.ndarray, eps, D: int | None = None) -> np.ndarray:
    ss0 = s @ v.s
    amp = np.exp(-0.5 * s_norm2(ss0) + 0.5 * s_norm2(s))
    if D is None:
        return amp * spherical_batch(eps, ss0, v.h)
    return amp * np.array([rep_operator(eps, si, v.h, D).matrix[0, 0] for si in ss0])


def pair_against_vacuum(g: StepCurrent, omega: Configuration, eps=None, D: int | None = None) -> complex:
    """``<U(g) Q, Q>`` restricted to one configuration: the product of point factors."""
    if len(omega) == 0:
        return 1.0 + 0.0j
    return complex(np.prod(point_factors(g, omega.s, omega.x, eps, D)))


def expectation_functional(
    g: StepCurrent,
    t: QPTriple | None = None,
    n_samples: int = 20000,
    seed: int = 0,
    eps=None,
) -> Estimate:
    """``Phi(g)``: Monte Carlo mean of the vacuum pairing over configurations.

    Configurations come from the Poisson process of intensity ``e^{-u} mu|W``
    obtained by thinning; the normalising factor
    ``exp(int_W (e^{-|s|^2} - e^{-u}) dmu)`` is 1 for the vacuum triple.
    """
    t = t or vacuum_triple(g.sig.p)
    rng = np.random.default_rng(seed)
    batch = sample_configurations(t, rng, n_samples, thin=lambda s, x: np.exp(-t.u(s)))
    norm = math.exp(t.radial_integral(lambda r: math.exp(-r * r) - math.exp(-float(t.u_radial(np.array(r))))))
    vals = norm * batch.prod_per_config(point_factors(g, batch.s, batch.x, eps))
    if not np.all(np.isfinite(vals)):
        raise NonFinite("vacuum pairing produced non-finite values")
    value = complex(vals.mean())
    se = float(math.sqrt((vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / n_samples))
    return Estimate(value, se, n_samples, seed)


def expectation_closed(g: StepCurrent, t: QPTriple | None = None, eps=None, n_samples: int = 200000, seed: int = 0) -> Estimate:
    """``exp(int (G - 1) e^{-|s|^2} dmu)``; 1-D quadrature for p = 1, Monte Carlo otherwise."""
    t = t or vacuum_triple(g.sig.p)
    eps = all_plus(g.sig.p) if eps is None else sign_vector(eps, g.sig.p)
    total, var = 0.0 + 0.0j, 0.0
    if g.sig.p == 1:
        for lo, hi, v in g.pieces():
            def integrand(tt, v=v):
                s = np.array([[[math.exp(tt)]]], dtype=np.complex128)
                return (_piece_factor(v, s, eps)[0] - 1.0) * math.exp(-math.exp(2 * tt))

            w = t.window
            re, _ = sp_integrate.quad(lambda tt: integrand(tt).real, math.log(w.delta), math.log(w.R), limit=400)
            im, _ = sp_integrate.quad(lambda tt: integrand(tt).imag, math.log(w.delta), math.log(w.R), limit=400)
            total += (hi - lo) * t.area * (re + 1j * im)
        return Estimate(complex(np.exp(total)), 0.0, 0, seed)
    rng = np.random.default_rng(seed)
    s = t.nu.sample_window(rng, n_samples, t.window)
    x = rng.uniform(size=n_samples)
    vals = (point_factors(g, s, x, eps) - 1.0) * np.exp(-s_norm2(s)) * t.mass()
    total = vals.mean()
    se_total = math.sqrt((vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / n_samples)
    val = complex(np.exp(total))
    return Estimate(val, abs(val) * se_total, n_samples, seed)


# --- formal current cocycles ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CurrentCocycleCombination:
    """Finite formal sum ``sum lambda_i b(p_i)`` over P-valued step currents."""

    sig: Signature
    terms: tuple = ()

    @classmethod
    def generator(cls, p: StepCurrent, coeff: complex = 1.0) -> "CurrentCocycleCombination":
        return cls.build(p.sig, [(coeff, p)])

    @classmethod
    def build(cls, sig: Signature, pairs: Iterable[tuple[complex, StepCurrent]], tol: float = MERGE_TOL):
        merged: list[list] = []
        for coeff, p in pairs:
            if p.variant != "iwasawa":
                raise VariantMismatch("cocycle generators are P-valued currents")
            p = p.canonical(tol)
            if p.is_identity(tol):
                continue
            for item in merged:
                if item[1].distance(p) <= tol:
                    item[0] += complex(coeff)
                    break
            else:
                merged.append([complex(coeff), p])
        return cls(sig, tuple((c, p) for c, p in merged if abs(c) > tol))

    def __add__(self, other):
        return CurrentCocycleCombination.build(self.sig, list(self.terms) + list(other.terms))

    def __sub__(self, other):
        return self + CurrentCocycleCombination(other.sig, tuple((-c, p) for c, p in other.terms))

    def __len__(self):
        return len(self.terms)

    def is_zero(self, tol: float = MERGE_TOL) -> bool:
        return all(abs(c) <= tol for c, _ in self.terms)

    def equals(self, other, tol: float = MERGE_TOL) -> bool:
        return (self - other).is_zero(tol)

    def to_dict(self) -> dict:
        return {
            "p": self.sig.p,
            "q": self.sig.q,
            "terms": [{"coeff": [c.real, c.imag], "current": p.to_list()} for c, p in self.terms],
        }


def act_current_iwasawa(g: StepCurrent, v: CurrentCocycleCombination) -> CurrentCocycleCombination:
    """``b(p) -> b(g p) - b(g)``."""
    pairs = []
    for c, p in v.terms:
        pairs.append((c, current_mul(g, p)))
        pairs.append((-c, g))
    return CurrentCocycleCombination.build(v.sig, pairs)


def _pointwise_conjugate(k: StepCurrent, p: StepCurrent) -> StepCurrent:
    rk, rp = k.refine(p.breaks), p.refine(k.breaks)
    vals = tuple(k_conjugate(kv, pv)[0] for kv, pv in zip(rk.values, rp.values))
    return StepCurrent(p.sig, "iwasawa", rk.breaks, vals)


def act_current_compact(k: StepCurrent, v: CurrentCocycleCombination) -> CurrentCocycleCombination:
    """``b(p) -> b(p')`` with ``k(x) p(x) = p'(x) k'(x)`` piece by piece."""
    if k.variant == "group" and not all(is_compact(val, k.sig) for val in k.values):
        raise InvalidInput("compact action needs K-valued pieces")
    return CurrentCocycleCombination.build(v.sig, [(c, _pointwise_conjugate(k, p)) for c, p in v.terms])


def iwasawa_split(g: StepCurrent) -> tuple[StepCurrent, StepCurrent]:
    """Pointwise ``g(x) = p(x) k(x)``."""
    parts = [iwasawa_decompose(v) for v in g.values]
    p = StepCurrent(g.sig, "iwasawa", g.breaks, tuple(a for a, _ in parts))
    k = StepCurrent(g.sig, "compact", g.breaks, tuple(b for _, b in parts))
    return p, k


def act_current_group(g: StepCurrent, v: CurrentCocycleCombination) -> CurrentCocycleCombination:
    """Factor pointwise, apply the K-current, then the P-current."""
    p, k = iwasawa_split(g)
    return act_current_iwasawa(p, act_current_compact(k, v))


def central_current(sig: Signature, breaks: Sequence[float], phases: Sequence[float]) -> StepCurrent:
    """Step current with values ``exp(i theta) e`` in the centre."""
    vals = tuple(GroupElement(sig, np.exp(1j * th) * np.eye(sig.n)) for th in phases)
    return StepCurrent(sig, "compact", tuple(breaks), vals)


def as_group_current(p: StepCurrent) -> StepCurrent:
    from .iwasawa import embed

    return StepCurrent(p.sig, "group", p.breaks, tuple(embed(v) for v in p.values))
