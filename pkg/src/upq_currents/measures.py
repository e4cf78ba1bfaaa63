"""Measures on the triangular group S and Monte Carlo quadrature over them.

S is parametrised by p^2 real coordinates: the p positive diagonal entries
followed by (real, imaginary) parts of the strictly lower entries.  Densities
are taken with respect to Lebesgue measure in these coordinates, so that
``|s|^2 = tr(s s^*)`` is the squared Euclidean norm of the coordinate vector.

All integrals are over a radial window ``delta <= |s| <= R`` and come back as
:class:`Estimate` objects carrying a standard error.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidInput, NonFinite
from .linalg import map_matrix, real_linear_det

# per-coordinate parameters of the generic importance proposal
PROPOSAL_LOG_SIGMA = 1.0
PROPOSAL_OFFDIAG_SIGMA = 1.0


@dataclass(frozen=True)
class Window:
    delta: float = 1e-3
    R: float = 10.0

    def __post_init__(self):
        if not (0 < self.delta < self.R) or not math.isfinite(self.R):
            raise InvalidInput(f"window needs 0 < delta < R < inf, got [{self.delta}, {self.R}]")

    def scaled(self, delta: float | None = None, R: float | None = None) -> "Window":
        return Window(self.delta if delta is None else delta, self.R if R is None else R)


@dataclass(frozen=True)
class Estimate:
    value: complex | float
    std_error: float
    n_samples: int
    seed: int | None = None
    ess: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        v = self.value
        if isinstance(v, complex) or np.iscomplexobj(v):
            d["value"] = [float(np.real(v)), float(np.imag(v))]
        else:
            d["value"] = float(v)
        return d


# --- coordinates -----------------------------------------------------------

def coord_dim(p: int) -> int:
    return p * p


def s_to_coords(s: np.ndarray) -> np.ndarray:
    """(..., p, p) lower-triangular -> (..., p^2) real coordinates."""
    s = np.asarray(s)
    p = s.shape[-1]
    il = np.tril_indices(p, -1)
    diag = np.diagonal(s, axis1=-2, axis2=-1).real
    off = s[..., il[0], il[1]]
    offr = np.stack([off.real, off.imag], axis=-1).reshape(*s.shape[:-2], -1)
    return np.concatenate([diag, offr], axis=-1)


def coords_to_s(c: np.ndarray, p: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    batch = c.shape[:-1]
    s = np.zeros(batch + (p, p), dtype=np.complex128)
    idx = np.arange(p)
    s[..., idx, idx] = c[..., :p]
    il = np.tril_indices(p, -1)
    off = c[..., p:].reshape(batch + (len(il[0]), 2))
    s[..., il[0], il[1]] = off[..., 0] + 1j * off[..., 1]
    return s


def s_norm2(s: np.ndarray) -> np.ndarray:
    """``|s|^2 = tr(s s^*)`` over a batch."""
    return np.sum(np.abs(s) ** 2, axis=(-2, -1))


def right_translation_jacobian(s0: np.ndarray) -> float:
    """Determinant of ``s -> s s0`` on the real coordinates of S."""
    s0 = np.asarray(s0, dtype=np.complex128)
    p = s0.shape[0]
    mat = map_matrix(lambda c: s_to_coords(coords_to_s(c, p) @ s0), coord_dim(p))
    return real_linear_det(mat.T)


def jacobian_product_formula(s0: np.ndarray) -> float:
    """Closed form ``prod_j (s0)_jj^(2(p-j)+1)`` (j counted from 1)."""
    d = np.diagonal(np.asarray(s0)).real
    p = d.size
    return float(np.prod(d ** (2 * (p - np.arange(1, p + 1)) + 1)))


@lru_cache(maxsize=None)
def right_haar_exponents(p: int) -> tuple[float, ...]:
    """Exponents c_i with ``prod r_ii^{-c_i}`` right-invariant on S.

    Solved from ``sum_i c_i log (s0)_ii = log J(s0)`` over random s0, where J
    is the numerically computed Jacobian of right translation.  The solution
    is integral; it is snapped to integers once the fit is exact.
    """
    rng = np.random.default_rng(20171124 + p)
    rows, rhs = [], []
    for _ in range(3 * p + 2):
        s0 = coords_to_s(np.concatenate([np.exp(rng.standard_normal(p)), rng.standard_normal(p * p - p)]), p)
        rows.append(np.log(np.diagonal(s0).real))
        rhs.append(math.log(right_translation_jacobian(s0)))
    c, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    snapped = np.round(c)
    if np.max(np.abs(c - snapped)) < 1e-8:
        c = snapped
    return tuple(float(v) for v in c)


# --- measures --------------------------------------------------------------

def _sphere_orthant_area(p: int) -> float:
    """Area of the part of the unit sphere in R^{p^2} with positive diagonal coordinates."""
    d = coord_dim(p)
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2) / 2**p


@dataclass(frozen=True, eq=False)
class MeasureOnS:
    """A measure on S given by a log-density in the flat coordinates.

    ``kind`` is one of ``power_law``, ``right_haar``, ``custom``.  Power-law
    measures are sampled exactly in polar form on a window; the others go
    through the generic log-normal / Gaussian importance proposal.
    """

    kind: str
    p: int
    log_density: Callable[[np.ndarray], np.ndarray]

    def density(self, s: np.ndarray) -> np.ndarray:
        return np.exp(self.log_density(s))

    @property
    def exact_window_sampler(self) -> bool:
        return self.kind == "power_law"

    def window_mass(self, window: Window) -> float:
        if self.kind != "power_law":
            raise InvalidInput(f"window mass is only available in closed form for power_law, not {self.kind}")
        return _sphere_orthant_area(self.p) * math.log(window.R / window.delta)

    def sample_window(self, rng: np.random.Generator, n: int, window: Window) -> np.ndarray:
        """``n`` points drawn from the normalised restriction to ``window`` (power law only)."""
        if self.kind != "power_law":
            raise InvalidInput("exact window sampling needs the power-law measure")
        return _polar_sample(rng, n, self.p, window)

    def sample(self, rng: np.random.Generator, n: int, window: Window) -> tuple[np.ndarray, np.ndarray]:
        """Importance sample: points and log-weights with ``int_W F dnu ~ mean(F w)``."""
        if self.kind == "power_law":
            pts = _polar_sample(rng, n, self.p, window)
            return pts, np.full(n, math.log(self.window_mass(window)))
        pts, logq = _proposal_sample(rng, n, self.p)
        r = np.sqrt(s_norm2(pts))
        inside = (r >= window.delta) & (r <= window.R)
        logw = np.where(inside, self.log_density(pts) - logq, -np.inf)
        return pts, logw


def _polar_sample(rng: np.random.Generator, n: int, p: int, window: Window) -> np.ndarray:
    # |s|^{-d} ds = r^{-1} dr d(omega): log r uniform, omega uniform on the orthant of the sphere
    d = coord_dim(p)
    logr = rng.uniform(math.log(window.delta), math.log(window.R), size=n)
    g = rng.standard_normal((n, d))
    g[:, :p] = np.abs(g[:, :p])
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return coords_to_s(g * np.exp(logr)[:, None], p)


def _proposal_sample(rng: np.random.Generator, n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    ls, os_ = PROPOSAL_LOG_SIGMA, PROPOSAL_OFFDIAG_SIGMA
    logd = ls * rng.standard_normal((n, p))
    off = os_ * rng.standard_normal((n, p * p - p))
    c = np.concatenate([np.exp(logd), off], axis=1)
    logq = (
        np.sum(-logd - 0.5 * (logd / ls) ** 2 - math.log(ls * math.sqrt(2 * math.pi)), axis=1)
        + np.sum(-0.5 * (off / os_) ** 2 - math.log(os_ * math.sqrt(2 * math.pi)), axis=1)
    )
    return coords_to_s(c, p), logq


def power_law_measure(p: int) -> MeasureOnS:
    """``d nu(s) = |s|^{-p^2} ds``."""
    d = coord_dim(p)
    return MeasureOnS("power_law", p, lambda s: -0.5 * d * np.log(s_norm2(s)))


def right_haar_measure(p: int) -> MeasureOnS:
    c = np.array(right_haar_exponents(p))

    def logdens(s):
        diag = np.diagonal(s, axis1=-2, axis2=-1).real
        return -np.sum(c * np.log(diag), axis=-1)

    return MeasureOnS("right_haar", p, logdens)


def custom_measure(p: int, log_density: Callable[[np.ndarray], np.ndarray]) -> MeasureOnS:
    return MeasureOnS("custom", p, log_density)


def radon_nikodym(measure: MeasureOnS, s: np.ndarray, s0: np.ndarray) -> np.ndarray:
    """``d nu(s s0) / d nu(s)``: density ratio times the translation Jacobian."""
    s = np.asarray(s, dtype=np.complex128)
    s0 = np.asarray(s0, dtype=np.complex128)
    return np.exp(measure.log_density(s @ s0) - measure.log_density(s)) * right_translation_jacobian(s0)


def power_law_rn_bound(s0: np.ndarray) -> float:
    """Upper bound ``sigma_min(s0)^{-p^2} J(s0)`` on the power-law Radon-Nikodym derivative."""
    s0 = np.asarray(s0)
    p = s0.shape[0]
    smin = np.linalg.svd(s0, compute_uv=False)[-1]
    return float(smin ** (-(p * p)) * jacobian_product_formula(s0))


def haar_reweight(nu: MeasureOnS) -> Callable[[np.ndarray], np.ndarray]:
    """Weight ``a`` with ``|a(s)|^2 = d mu / d nu`` for the right Haar measure ``mu``."""
    mu = right_haar_measure(nu.p)
    return lambda s: np.exp(0.5 * (mu.log_density(s) - nu.log_density(s)))


def gaussian_weight(s: np.ndarray) -> np.ndarray:
    """``f(s) = exp(-|s|^2 / 2)``."""
    return np.exp(-0.5 * s_norm2(s))


# --- quadrature --------------------------------------------------------------

def integrate(
    measure: MeasureOnS,
    fn: Callable[[np.ndarray], np.ndarray],
    window: Window,
    n_samples: int,
    seed: int,
) -> Estimate:
    """Monte Carlo ``int_W fn dnu`` with its standard error and effective sample size."""
    rng = np.random.default_rng(seed)
    pts, logw = measure.sample(rng, n_samples, window)
    w = np.exp(logw)
    vals = np.asarray(fn(pts)) * w
    value = vals.mean()
    err = float(np.std(vals, ddof=1) / math.sqrt(n_samples))
    ess = float(w.sum() ** 2 / np.sum(w**2)) if np.any(w > 0) else 0.0
    if not np.isfinite(value):
        raise NonFinite("integral estimate is not finite")
    value = complex(value) if np.iscomplexobj(vals) else float(value)
    return Estimate(value, err, n_samples, seed, ess)


def child_seeds(seed: int, k: int) -> list[int]:
    """``k`` reproducible integer seeds derived from a master seed."""
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(k)]
