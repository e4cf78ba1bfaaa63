"""Windowed quasi-Poisson measures on configurations in Y = S x [0, 1).

The intensity is ``mu = nu x dx`` with ``nu`` the power-law measure on S, and
``u`` is a radial function ``u(s, x) = U(|s|)``.  On a window ``W`` (radial
cut on S, all of X) the quasi-Poisson measure is ``exp(c_W)`` times the
Poisson law of intensity ``mu|W``, with ``c_W = int_W (1 - e^{-u}) dmu``, and
its characteristic functional is

    int exp(-sum_{y in omega} f(y)) = exp(int_W (e^{-f} - e^{-u}) dmu).

Radial integrals are done by adaptive quadrature in ``log r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as sp_integrate

from .errors import WindowTooLarge
from .measures import (
    Estimate,
    MeasureOnS,
    Window,
    _sphere_orthant_area,
    child_seeds,
    coords_to_s,
    power_law_measure,
    s_norm2,
    s_to_coords,
)

MAX_EXPECTED_POINTS = 1e5
QUAD_LIMIT = 400


@dataclass(frozen=True, eq=False)
class QPTriple:
    """``(Y, mu, u)`` restricted to a window; ``u_radial(r)`` gives ``u`` at ``|s| = r``."""

    p: int
    u_radial: Callable[[np.ndarray], np.ndarray]
    window: Window = Window()
    name: str = "u"

    @property
    def nu(self) -> MeasureOnS:
        return power_law_measure(self.p)

    @property
    def area(self) -> float:
        return _sphere_orthant_area(self.p)

    def mass(self, window: Window | None = None) -> float:
        return self.nu.window_mass(window or self.window)

    def u(self, s: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        return np.asarray(self.u_radial(np.sqrt(s_norm2(s))), dtype=float)

    def radial_integral(self, g: Callable[[float], float], window: Window | None = None) -> float:
        """``A int_delta^R g(r) dr / r``: the mu-integral of a radial, x-independent function."""
        w = window or self.window
        val, _ = sp_integrate.quad(lambda t: g(math.exp(t)), math.log(w.delta), math.log(w.R), limit=QUAD_LIMIT)
        return self.area * val

    def log_weight(self, window: Window | None = None) -> float:
        """``c_W = int_W (1 - e^{-u}) dmu``."""
        return self.radial_integral(lambda r: 1.0 - math.exp(-float(self.u_radial(np.array(r)))), window)

    def with_window(self, window: Window) -> "QPTriple":
        return QPTriple(self.p, self.u_radial, window, self.name)


def half_square_triple(p: int, window: Window = Window()) -> QPTriple:
    return QPTriple(p, lambda r: 0.5 * np.asarray(r) ** 2, window, "half_square")


def square_triple(p: int, window: Window = Window()) -> QPTriple:
    return QPTriple(p, lambda r: np.asarray(r) ** 2, window, "square")


def zero_triple(p: int, window: Window = Window()) -> QPTriple:
    return QPTriple(p, lambda r: np.zeros_like(np.asarray(r, dtype=float)), window, "zero")


@dataclass(frozen=True)
class TestFunction:
    """``f(s, x) = radial(|s|)`` for ``x_lo <= x < x_hi`` and ``background`` elsewhere."""

    name: str
    radial: Callable[[np.ndarray], np.ndarray]
    x_lo: float = 0.0
    x_hi: float = 1.0
    background: float = 0.0

    __test__ = False  # not a pytest class

    def __call__(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        inside = (x >= self.x_lo) & (x < self.x_hi)
        return np.where(inside, self.radial(np.sqrt(s_norm2(s))), self.background)

    def closed_exponent(self, t: QPTriple, window: Window | None = None) -> float:
        """``int_W (e^{-f} - e^{-u}) dmu``."""
        L = self.x_hi - self.x_lo
        eb = math.exp(-self.background)

        def g(r):
            ra = np.array(r)
            return L * math.exp(-float(self.radial(ra))) + (1 - L) * eb - math.exp(-float(t.u_radial(ra)))

        return t.radial_integral(g, window)


def canonical_test_functions() -> list[TestFunction]:
    return [
        TestFunction("zero", lambda r: np.zeros_like(r)),
        TestFunction("constant", lambda r: np.full_like(r, 0.05, dtype=float)),
        TestFunction("shell_indicator", lambda r: np.where((r >= 0.5) & (r <= 2.0), 1.0, 0.0), 0.0, 0.5),
        TestFunction("half_square", lambda r: 0.5 * r**2),
        TestFunction("square_strip", lambda r: r**2, 0.0, 0.3, background=0.5),
    ]


# --- configurations ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Configuration:
    """Finite point set ``{(s_i, x_i)}`` inside a window, with an escape flag per point."""

    s: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    window: Window = Window()
    log_weight: float = 0.0
    escaped: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return int(self.x.shape[0])

    def to_dict(self) -> dict:
        return {
            "window": [self.window.delta, self.window.R],
            "log_weight": self.log_weight,
            "points": [[s_to_coords(si).tolist(), float(xi)] for si, xi in zip(self.s, self.x)],
        }

    @classmethod
    def from_dict(cls, d: dict, p: int) -> "Configuration":
        pts = d["points"]
        s = coords_to_s(np.array([c for c, _ in pts]).reshape(-1, p * p), p)
        x = np.array([xi for _, xi in pts], dtype=float)
        return cls(s, x, Window(*d["window"]), float(d["log_weight"]))


@dataclass(frozen=True, eq=False)
class ConfigurationBatch:
    """Many configurations stored flat: ``owner[i]`` is the configuration of point ``i``."""

    s: np.ndarray
    x: np.ndarray
    owner: np.ndarray
    n_configs: int
    log_weight: float

    def counts(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.n_configs)

    def sum_per_config(self, values: np.ndarray) -> np.ndarray:
        return np.bincount(self.owner, weights=values, minlength=self.n_configs)

    def prod_per_config(self, values: np.ndarray) -> np.ndarray:
        """Product of complex per-point values over each configuration."""
        values = np.asarray(values, dtype=np.complex128)
        logabs = np.log(np.abs(values))
        ang = np.angle(values)
        la = np.bincount(self.owner, weights=logabs, minlength=self.n_configs)
        an = np.bincount(self.owner, weights=ang, minlength=self.n_configs)
        return np.exp(la + 1j * an)

    def config(self, i: int, window: Window) -> Configuration:
        m = self.owner == i
        return Configuration(self.s[m], self.x[m], window, self.log_weight)


def _check_size(expected: float):
    if expected > MAX_EXPECTED_POINTS:
        raise WindowTooLarge(f"expected {expected:.3g} points exceeds the cap {MAX_EXPECTED_POINTS:.0e}")


def sample_configuration(t: QPTriple, rng: np.random.Generator) -> Configuration:
    """One Poisson configuration of intensity ``mu|W``; ``c_W`` is attached as log-weight."""
    lam = t.mass()
    _check_size(lam)
    n = rng.poisson(lam)
    s = t.nu.sample_window(rng, n, t.window)
    x = rng.uniform(0.0, 1.0, size=n)
    return Configuration(s, x, t.window, t.log_weight())


def sample_configurations(t: QPTriple, rng: np.random.Generator, n_configs: int, thin: Callable | None = None) -> ConfigurationBatch:
    """``n_configs`` independent configurations in flat storage.

    With ``thin`` given, each point is kept with probability ``thin(s, x)``,
    which samples the Poisson process of intensity ``thin * mu|W``.
    """
    lam = t.mass()
    _check_size(lam)
    counts = rng.poisson(lam, size=n_configs)
    total = int(counts.sum())
    s = t.nu.sample_window(rng, total, t.window)
    x = rng.uniform(0.0, 1.0, size=total)
    owner = np.repeat(np.arange(n_configs), counts)
    if thin is not None:
        keep = rng.uniform(size=total) < thin(s, x)
        s, x, owner = s[keep], x[keep], owner[keep]
    return ConfigurationBatch(s, x, owner, n_configs, t.log_weight())


def translate_configuration(omega: Configuration, s_field: Callable[[np.ndarray], np.ndarray]) -> Configuration:
    """``(s, x) -> (s s~(x), x)``; points leaving the window are flagged, not dropped."""
    if len(omega) == 0:
        return Configuration(omega.s, omega.x, omega.window, omega.log_weight, np.zeros(0, dtype=bool))
    s_new = omega.s @ s_field(omega.x)
    r = np.sqrt(s_norm2(s_new))
    escaped = (r < omega.window.delta) | (r > omega.window.R)
    return Configuration(s_new, omega.x.copy(), omega.window, omega.log_weight, escaped)


# --- checks ------------------------------------------------------------------

@dataclass(frozen=True)
class CFCheck:
    name: str
    mc: float
    closed: float
    std_error: float
    n_samples: int
    seed: int

    @property
    def z_score(self) -> float:
        return abs(self.mc - self.closed) / self.std_error if self.std_error > 0 else (0.0 if self.mc == self.closed else math.inf)

    def passed(self, n_sigma: float = 3.0) -> bool:
        return self.z_score <= n_sigma

    def to_dict(self) -> dict:
        return {"name": self.name, "mc": self.mc, "closed": self.closed, "std_error": self.std_error,
                "n_samples": self.n_samples, "seed": self.seed}


def characteristic_functional_check(t: QPTriple, f: TestFunction, n_samples: int = 20000, seed: int = 0) -> CFCheck:
    """Compare ``e^{c_W} E[exp(-sum f)]`` with ``exp(int_W (e^{-f} - e^{-u}) dmu)``."""
    rng = np.random.default_rng(seed)
    batch = sample_configurations(t, rng, n_samples)
    vals = np.exp(-batch.sum_per_config(f(batch.s, batch.x)))
    scale = math.exp(batch.log_weight)
    mc = scale * float(vals.mean())
    se = scale * float(vals.std(ddof=1) / math.sqrt(n_samples))
    return CFCheck(f.name, mc, math.exp(f.closed_exponent(t)), se, n_samples, seed)


@dataclass(frozen=True)
class RatioEstimate:
    name: str
    ratio: float
    std_error: float

    def to_dict(self) -> dict:
        return {"name": self.name, "ratio": self.ratio, "std_error": self.std_error}


def _ratio(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    # delta method for mean(num)/mean(den) on paired samples
    n = num.size
    a, b = num.mean(), den.mean()
    r = a / b
    resid = (num - r * den) / b
    return float(r), float(resid.std(ddof=1) / math.sqrt(n))


@dataclass(frozen=True)
class QuasiInvarianceReport:
    ratios: list[RatioEstimate]
    bound: float
    j2_mc: RatioEstimate
    j2_quadrature: Estimate

    def to_dict(self) -> dict:
        return {
            "ratios": [r.to_dict() for r in self.ratios],
            "bound": self.bound,
            "j2_mc": self.j2_mc.to_dict(),
            "j2_quadrature": self.j2_quadrature.to_dict(),
        }


def j2_quadrature(t: QPTriple, pieces: Sequence[tuple[float, np.ndarray]], n_samples: int = 200000, seed: int = 0) -> Estimate:
    """``exp(int_W (e^{-u(s s0^{-1})} - e^{-u(s)}) dmu)`` for a step field given as (length, s0) pieces.

    For p = 1 each piece is a one-dimensional quadrature; otherwise the
    S-integral is Monte Carlo over exact window samples and the error is
    propagated through the exponential.
    """
    total, var = 0.0, 0.0
    rng = np.random.default_rng(seed)
    for length, s0 in pieces:
        s0 = np.asarray(s0, dtype=np.complex128)
        if t.p == 1:
            a = float(s0.real.ravel()[0])
            val = t.radial_integral(
                lambda r: math.exp(-float(t.u_radial(np.array(r / a)))) - math.exp(-float(t.u_radial(np.array(r))))
            )
            total += length * val
        else:
            pts = t.nu.sample_window(rng, n_samples, t.window)
            s0i = np.linalg.inv(s0)
            g = np.exp(-t.u(pts @ s0i)) - np.exp(-t.u(pts))
            mass = t.mass()
            total += length * mass * float(g.mean())
            var += (length * mass) ** 2 * float(g.var(ddof=1)) / n_samples
    val = math.exp(total)
    return Estimate(val, val * math.sqrt(var), n_samples if t.p > 1 else 0, seed)


def quasi_invariance_estimate(
    t: QPTriple,
    s_field: Callable[[np.ndarray], np.ndarray],
    deviations: Sequence[TestFunction],
    pieces: Sequence[tuple[float, np.ndarray]],
    n_samples: int = 20000,
    seed: int = 0,
) -> QuasiInvarianceReport:
    """Characteristic functional of the translated process over the original one.

    Each test function is ``f = u + phi`` with ``phi`` from ``deviations``; the
    translated functional uses ``f(y s~^{-1})``.  Both means run over the same
    Poisson configurations, so the ratio is a paired estimate.  The zero
    deviation gives the factor ``J2``, which is also computed by quadrature.
    """
    rng = np.random.default_rng(seed)
    batch = sample_configurations(t, rng, n_samples)
    inv_field = lambda x: np.linalg.inv(s_field(x))  # noqa: E731
    moved = batch.s @ inv_field(batch.x) if batch.s.shape[0] else batch.s
    u_here, u_moved = t.u(batch.s), t.u(moved)
    ratios = []
    for phi in deviations:
        num = np.exp(-batch.sum_per_config(u_moved + phi(moved, batch.x)))
        den = np.exp(-batch.sum_per_config(u_here + phi(batch.s, batch.x)))
        r, se = _ratio(num, den)
        ratios.append(RatioEstimate(phi.name, r, se))
    zero = next((r for r in ratios if r.name == "zero"), None)
    if zero is None:
        num = np.exp(-batch.sum_per_config(u_moved))
        den = np.exp(-batch.sum_per_config(u_here))
        zero = RatioEstimate("zero", *_ratio(num, den))
    bound = max(r.ratio for r in ratios) if ratios else zero.ratio
    return QuasiInvarianceReport(ratios, bound, zero, j2_quadrature(t, pieces, seed=child_seeds(seed, 1)[0]))


@dataclass(frozen=True)
class PoissonStats:
    void_prob: float
    void_expected: float
    void_se: float
    mean_count: float
    var_count: float
    expected_count: float
    count_se: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def sub_window_counts(batch: ConfigurationBatch, r_lo: float, r_hi: float, x_lo: float, x_hi: float) -> np.ndarray:
    r = np.sqrt(s_norm2(batch.s))
    inside = (r >= r_lo) & (r < r_hi) & (batch.x >= x_lo) & (batch.x < x_hi)
    return np.bincount(batch.owner[inside], minlength=batch.n_configs)


def sub_window_mass(t: QPTriple, r_lo: float, r_hi: float, x_lo: float, x_hi: float) -> float:
    return t.area * math.log(r_hi / r_lo) * (x_hi - x_lo)


def poisson_stats(t: QPTriple, batch: ConfigurationBatch, r_lo, r_hi, x_lo, x_hi) -> PoissonStats:
    """Void probability and count moments of a sub-window against exp(-m), m, m."""
    c = sub_window_counts(batch, r_lo, r_hi, x_lo, x_hi)
    m = sub_window_mass(t, r_lo, r_hi, x_lo, x_hi)
    n = batch.n_configs
    pv = float(np.mean(c == 0))
    ev = math.exp(-m)
    return PoissonStats(
        pv, ev, math.sqrt(ev * (1 - ev) / n),
        float(c.mean()), float(c.var(ddof=1)), m, math.sqrt(m / n),
    )


def count_covariance(batch: ConfigurationBatch, box_a, box_b) -> tuple[float, float]:
    """Empirical covariance of counts in two boxes and its standard error."""
    a = sub_window_counts(batch, *box_a).astype(float)
    b = sub_window_counts(batch, *box_b).astype(float)
    da, db = a - a.mean(), b - b.mean()
    prod = da * db
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(len(prod)))

