"""Quadrature report for the three integrability conditions of a special representation.

Given a measure ``nu`` on S and a weight ``f`` the three quantities are

* (i)   ``int f^2 dnu`` over ``delta <= |s| <= R``, which must grow without
  bound as ``delta -> 0``; reported as a slope against ``log(1/delta)``;
* (ii)  ``int |f(s s0) - f(s)|^2 dnu`` for each test ``s0``, which must stay
  finite;
* (iii) ``int (1 - Re phi_s(h)) f^2 dnu`` for each test Heisenberg element
  ``h``, with ``phi_s`` the vacuum spherical function of the fibre over ``s``.

Finiteness is judged by doubling ``R``: the estimate must not move by more
than its noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bargmann import spherical_batch
from .characters import all_plus
from .errors import NonFinite
from .iwasawa import HeisenbergElement
from .measures import Estimate, MeasureOnS, Window, child_seeds, integrate

GROWTH_TOL = 0.02


@dataclass(frozen=True)
class ConditionRow:
    condition: str
    window: tuple[float, float]
    estimate: float
    std_error: float
    n_samples: int
    seed: int
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "label": self.label,
            "window": list(self.window),
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    slope_se: float
    intercept: float


@dataclass(frozen=True)
class StabilityCheck:
    label: str
    at_R: Estimate
    at_2R: Estimate

    @property
    def ratio(self) -> float:
        a, b = float(np.real(self.at_R.value)), float(np.real(self.at_2R.value))
        return b / a if a != 0 else (1.0 if b == 0 else math.inf)

    @property
    def ratio_se(self) -> float:
        a, b = float(np.real(self.at_R.value)), float(np.real(self.at_2R.value))
        if a == 0:
            return 0.0
        return abs(self.ratio) * math.hypot(self.at_R.std_error / a, self.at_2R.std_error / b if b else 0.0)

    @property
    def combined_se(self) -> float:
        return math.hypot(self.at_R.std_error, self.at_2R.std_error)

    def stable(self, n_sigma: float = 3.0) -> bool:
        return abs(self.ratio - 1.0) <= n_sigma * self.ratio_se or self.ratio_se == 0.0 and self.ratio == 1.0


@dataclass
class SpecialReport:
    growth: GrowthFit
    stability: list[StabilityCheck] = field(default_factory=list)
    rows: list[ConditionRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "growth_slope": self.growth.slope,
            "growth_slope_se": self.growth.slope_se,
            "stability": [
                {"label": c.label, "ratio": c.ratio, "ratio_se": c.ratio_se, "stable": c.stable()}
                for c in self.stability
            ],
            "rows": [r.to_dict() for r in self.rows],
        }


def fit_growth(deltas: Sequence[float], estimates: Sequence[Estimate]) -> GrowthFit:
    """Weighted least-squares slope of the estimates against ``log(1/delta)``."""
    x = np.log(1.0 / np.asarray(deltas, dtype=float))
    y = np.array([float(np.real(e.value)) for e in estimates])
    se = np.array([e.std_error for e in estimates], dtype=float)
    exact = np.any(se <= 0)
    # exact integrals (zero error) get an unweighted fit and a zero slope error
    w = np.ones_like(se) if exact else 1.0 / se**2
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = float(np.sum(w * (x - xm) * (y - ym)) / sxx)
    return GrowthFit(slope, 0.0 if exact else float(1.0 / math.sqrt(sxx)), float(ym - slope * xm))


def _row(cond, label, window, est) -> ConditionRow:
    return ConditionRow(cond, (window.delta, window.R), float(np.real(est.value)), est.std_error, est.n_samples, est.seed, label)


def _check_growth(check: StabilityCheck, growth_tol: float):
    a, b = float(np.real(check.at_R.value)), float(np.real(check.at_2R.value))
    jump = b - a
    if jump > growth_tol * max(abs(a), 1e-12) and jump > 3.0 * check.combined_se:
        raise NonFinite(f"{check.label}: estimate grows from {a:.6g} to {b:.6g} when R doubles")


def special_conditions(
    nu: MeasureOnS,
    f: Callable[[np.ndarray], np.ndarray],
    s0_list: Sequence[np.ndarray],
    heis_list: Sequence[HeisenbergElement],
    window: Window = Window(),
    n_samples: int = 20000,
    seed: int = 0,
    eps=None,
    n_decades: int = 4,
    growth_tol: float = GROWTH_TOL,
) -> SpecialReport:
    """Estimate conditions (i)-(iii) for ``(nu, f)``.

    Raises
    ------
    NonFinite
        If an estimate for (ii) or (iii) grows significantly when ``R`` doubles.
    """
    eps = all_plus(nu.p) if eps is None else eps
    seeds = iter(child_seeds(seed, n_decades + 1 + 2 * (len(s0_list) + len(heis_list))))
    rows: list[ConditionRow] = []

    f2 = lambda s: np.abs(f(s)) ** 2  # noqa: E731
    deltas, ests = [], []
    for k in range(n_decades + 1):
        w = window.scaled(delta=window.delta * 10.0 ** (-k))
        est = integrate(nu, f2, w, n_samples, next(seeds))
        deltas.append(w.delta)
        ests.append(est)
        rows.append(_row("i", f"delta=1e{math.log10(w.delta):+.0f}", w, est))
    growth = fit_growth(deltas, ests)

    checks: list[StabilityCheck] = []

    def stability(cond, label, integrand):
        pair = []
        for w in (window, window.scaled(R=2 * window.R)):
            est = integrate(nu, integrand, w, n_samples, next(seeds))
            pair.append(est)
            rows.append(_row(cond, label, w, est))
        check = StabilityCheck(label, *pair)
        _check_growth(check, growth_tol)
        checks.append(check)

    for i, s0 in enumerate(s0_list):
        s0 = np.asarray(s0, dtype=np.complex128)
        stability("ii", f"s0[{i}]", lambda s, s0=s0: np.abs(f(s @ s0) - f(s)) ** 2)
    for i, h in enumerate(heis_list):
        stability("iii", f"h[{i}]", lambda s, h=h: (1.0 - spherical_batch(eps, s, h).real) * f2(s))

    return SpecialReport(growth, checks, rows)
