"""Verification suites.

Every suite takes a :class:`RunConfig` and returns a :class:`SuiteResult`: a
list of report rows (check name, property label, estimate, tolerance,
verdict, seed) plus series for the plots.  Seeds are derived from the master
seed and the check name, so suites are reproducible one by one.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import exp1

from . import bargmann as bg
from . import cocycle as cc
from . import currents as cu
from . import quasi_poisson as qp
from .characters import char_eval, orbit_separation, sign_vectors
from .config import RunConfig
from .group import (
    PATTERNS,
    GroupElement,
    Signature,
    expected_dimension,
    involution_w,
    is_compact,
    is_member,
    lie_algebra_dimension,
    random_compact,
)
from .iwasawa import (
    HeisenbergElement,
    IwasawaElement,
    embed,
    heis_mul,
    iwasawa_decompose,
    k_conjugate,
    p_mul,
    random_group,
    random_heisenberg,
    random_iwasawa,
    random_s,
)
from .linalg import dagger
from .measures import (
    Window,
    _sphere_orthant_area,
    gaussian_weight,
    haar_reweight,
    integrate,
    power_law_measure,
    power_law_rn_bound,
    radon_nikodym,
    right_haar_exponents,
    right_haar_measure,
)
from .special import special_conditions

SMALL_SIGS = [Signature(p, q) for p in range(1, 4) for q in range(p, 4)]


@dataclass
class Row:
    check: str
    anchor: str
    estimate: object
    tolerance: object
    passed: bool
    seed: int | None = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "check": self.check,
            "anchor": self.anchor,
            "estimate": _plain(self.estimate),
            "tolerance": _plain(self.tolerance),
            "verdict": "pass" if self.passed else "fail",
            "seed": self.seed,
        }
        if self.detail:
            d["detail"] = _plain(self.detail)
        return d


@dataclass
class SuiteResult:
    name: str
    rows: list[Row] = field(default_factory=list)
    plots: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, *args, **kw) -> Row:
        row = Row(*args, **kw)
        self.rows.append(row)
        return row


def _plain(v):
    """Turn numpy and complex values into JSON-ready Python objects."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(np.real(v)), float(np.imag(v))]
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def seed_for(cfg: RunConfig, name: str) -> int:
    ss = np.random.SeedSequence([cfg.seed, zlib.crc32(name.encode())])
    return int(ss.generate_state(1)[0])


def _rng(cfg, name):
    s = seed_for(cfg, name)
    return np.random.default_rng(s), s


def _sig(cfg) -> Signature:
    return Signature(cfg.p, cfg.q)


def _window(cfg) -> Window:
    return Window(cfg.window_min, cfg.window_max)


def _small_heis(sig, rng, bound=0.3) -> HeisenbergElement:
    """Random Heisenberg element with ``|n| = |z| = bound`` (Frobenius).

    Fixed norms keep truncation residuals above rounding level, so refinement
    sequences stay strictly monotone for every seed.
    """
    h = random_heisenberg(sig, rng, 1.0)
    n = h.n * (bound / max(np.linalg.norm(h.n), 1e-300))
    z = h.z * (bound / max(np.linalg.norm(h.z), 1e-300)) if h.z.size else h.z
    return HeisenbergElement(sig, n, z)


# --- group -------------------------------------------------------------------

DIM_ANCHOR = {
    "full": "real dimension of U(p,q)",
    "heisenberg": "real dimension of the Heisenberg subgroup",
    "iwasawa": "real dimension of the Iwasawa subgroup",
    "compact": "real dimension of the maximal compact subgroup",
}


def suite_group(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("group")
    for sig in SMALL_SIGS:
        for pat in PATTERNS:
            d = lie_algebra_dimension(sig, pat)
            e = expected_dimension(sig, pat)
            res.add(f"dimension.{pat}.U({sig.p},{sig.q})", DIM_ANCHOR[pat], d, e, d == e)
    name = "closure.products_inverses"
    rng, seed = _rng(cfg, name)
    worst, inv_err = 0.0, 0.0
    n_each = 1000
    for sig in SMALL_SIGS:
        for _ in range(n_each // len(SMALL_SIGS) + 1):
            g1, g2 = random_group(sig, rng), random_group(sig, rng)
            worst = max(worst, is_member(g1 @ g2, sig).residual, is_member(g1.inv(), sig).residual)
            inv_err = max(inv_err, float(np.max(np.abs((g1 @ g1.inv()).m - np.eye(sig.n)))))
    res.add(name, "closure of U(p,q) under products and inverses", worst, 1e-8, worst <= 1e-8, seed,
            {"cases": (n_each // len(SMALL_SIGS) + 1) * len(SMALL_SIGS)})
    res.add("inverse.sigma_conjugate", "inverse is sigma g^* sigma", inv_err, 1e-8, inv_err <= 1e-8, seed)
    name = "compact.membership"
    rng, seed = _rng(cfg, name)
    ok = all(is_compact(random_compact(sig, rng), sig) for sig in SMALL_SIGS for _ in range(20))
    res.add(name, "random compact elements are unitary and preserve the form", ok, True, ok, seed)
    sig = _sig(cfg)
    w = involution_w(sig)
    werr = float(np.max(np.abs((w @ w).m - np.eye(sig.n))))
    ok = is_compact(w, sig) and werr == 0.0
    res.add("involution.w", "the involution lies in K and squares to the identity", werr, 0.0, ok)
    return res


# --- iwasawa -------------------------------------------------------------------

def suite_iwasawa(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("iwasawa")
    name = "round_trip"
    rng, seed = _rng(cfg, name)
    worst, rerun_ok, count = 0.0, True, 0
    sigs = [_sig(cfg)] + [s for s in SMALL_SIGS if s != _sig(cfg)]
    for i in range(500):
        sig = sigs[0] if i < 250 else sigs[i % len(sigs)]
        p0, k0 = random_iwasawa(sig, rng), random_compact(sig, rng)
        g = embed(p0) @ k0
        p1, k1 = iwasawa_decompose(g)
        worst = max(worst, p1.distance(p0), float(np.max(np.abs(k1.m - k0.m))))
        p2, k2 = iwasawa_decompose(g)
        rerun_ok &= np.array_equal(p1.coords(), p2.coords()) and np.array_equal(k1.m, k2.m)
        count += 1
    res.add(name, "g = p k recovers p and k", worst, 1e-8, worst <= 1e-8, seed, {"cases": count})
    res.add("round_trip.deterministic", "decomposition is unique across re-runs", rerun_ok, True, rerun_ok, seed)

    name = "heisenberg.axioms"
    rng, seed = _rng(cfg, name)
    assoc, comm = 0.0, 0.0
    for i in range(1000):
        sig = SMALL_SIGS[i % len(SMALL_SIGS)]
        a, b, c = (random_heisenberg(sig, rng) for _ in range(3))
        l, r = heis_mul(heis_mul(a, b), c), heis_mul(a, heis_mul(b, c))
        assoc = max(assoc, float(np.max(np.abs(l.n - r.n))), float(np.max(np.abs(l.z - r.z), initial=0.0)))
        k = heis_mul(heis_mul(a, b), heis_mul(b, a).inv())
        w = a.z @ dagger(b.z)
        central = -(w - dagger(w))
        comm = max(comm, float(np.max(np.abs(k.z), initial=0.0)), float(np.max(np.abs(k.n - central))))
    res.add("heisenberg.associativity", "Heisenberg product is associative", assoc, 1e-12, assoc <= 1e-12, seed)
    res.add("heisenberg.commutator", "commutators are central with value z1 z2^* - z2 z1^*", comm, 1e-12, comm <= 1e-12, seed)

    name = "iwasawa.group_law"
    rng, seed = _rng(cfg, name)
    hom, assoc = 0.0, 0.0
    for i in range(300):
        sig = SMALL_SIGS[i % len(SMALL_SIGS)]
        a, b, c = (random_iwasawa(sig, rng) for _ in range(3))
        hom = max(hom, float(np.max(np.abs(embed(a).m @ embed(b).m - embed(p_mul(a, b)).m))))
        assoc = max(assoc, p_mul(p_mul(a, b), c).distance(p_mul(a, p_mul(b, c))))
    res.add("iwasawa.embedding_homomorphism", "coordinate product matches the matrix product", hom, 1e-10, hom <= 1e-10, seed)
    res.add("iwasawa.associativity", "coordinate product is associative", assoc, 1e-10, assoc <= 1e-10, seed)

    name = "iwasawa.k_conjugate"
    rng, seed = _rng(cfg, name)
    worst = 0.0
    for sig in SMALL_SIGS:
        for _ in range(20):
            k, a = random_compact(sig, rng), random_iwasawa(sig, rng)
            a2, k2 = k_conjugate(k, a)
            worst = max(worst, float(np.max(np.abs((k @ embed(a)).m - (embed(a2) @ k2).m))))
            worst = max(worst, 0.0 if is_compact(k2, sig) else 1.0)
    res.add(name, "k p = p' k' with k' compact", worst, 1e-9, worst <= 1e-9, seed)
    return res


# --- bargmann ---------------------------------------------------------------------

def suite_bargmann(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("bargmann")
    s12 = Signature(1, 2)
    name = "spherical.identity"
    rng, seed = _rng(cfg, name)
    err = 0.0
    for _ in range(20):
        h = _small_heis(s12, rng)
        t = bg.rep_operator([1], np.eye(1), h, 12)
        chi = np.exp(np.trace(h.n - 0.5 * h.z @ dagger(h.z)))
        err = max(err, abs(t.matrix[0, 0] - chi), abs(bg.spherical_function([1], np.eye(1), h) - chi))
    res.add(name, "vacuum coefficient equals the character of n - zz^*/2", err, 1e-6, err <= 1e-6, seed, {"D": 12})

    sig, eps, D = _sig(cfg), cfg.eps, cfg.degree
    if sig.m:
        name = "spherical.identity.config"
        rng, seed = _rng(cfg, name)
        err = 0.0
        for _ in range(10):
            h, s = _small_heis(sig, rng), random_s(sig, rng)
            err = max(err, abs(bg.rep_operator(eps, s, h, D).matrix[0, 0] - bg.spherical_function(eps, s, h)))
        res.add(name, "vacuum coefficient of the fibre operator matches the spherical function", err, 1e-10, err <= 1e-10, seed)

        up, dn = bg.creation_annihilation(eps, sig, 0, 0, D)
        idx = up.basis.block(D - 1)
        ccr = float(np.max(np.abs((dn.matrix @ up.matrix - up.matrix @ dn.matrix)[np.ix_(idx, idx)] - np.eye(len(idx)))))
        res.add("ladder.commutation", "[A-, A+] = 1 on the interior block", ccr, 1e-12, ccr <= 1e-12)
        kill = float(np.max(np.abs(dn.matrix[:, 0])))
        res.add("ladder.annihilates_vacuum", "A- kills the vacuum", kill, 0.0, kill == 0.0)
        e1 = np.abs(bg.ladder_by_differences(eps, sig, 0, 0, D, 1e-4)[0].matrix - up.matrix)[:, idx].max()
        e2 = np.abs(bg.ladder_by_differences(eps, sig, 0, 0, D, 5e-5)[0].matrix - up.matrix)[:, idx].max()
        ratio = float(e1 / e2)
        res.add("ladder.finite_difference", "difference quotients of T converge to A+ at first order",
                ratio, "1.8..2.2", 1.8 <= ratio <= 2.2, None, {"err_t": float(e1), "err_t_half": float(e2)})

    name = "group_law.refinement"
    rng, seed = _rng(cfg, name)
    s, a, b = np.eye(1), _small_heis(s12, rng), _small_heis(s12, rng)
    degs = [6, 8, 10, 12]
    resid = [bg.group_law_residual([1], s, a, b, d) for d in degs]
    mono = all(x > y for x, y in zip(resid, resid[1:]))
    res.add(name, "truncated operators approach the group law as D grows", resid, "strictly decreasing", mono, seed, {"D": degs})
    res.add("group_law.D12", "group-law residual at D = 12 for |n|, |z| = 0.3", resid[-1], 1e-6, resid[-1] <= 1e-6, seed)
    uni = [bg.unitarity_residual([1], s, a, d) for d in degs]
    mono_u = all(x > y for x, y in zip(uni, uni[1:]))
    res.add("unitarity.refinement", "T^* T approaches the identity as D grows", uni, "strictly decreasing", mono_u, seed, {"D": degs})
    res.plots["group_law_refinement"] = {
        "kind": "semilogy", "x": degs, "series": {"group law": resid, "unitarity": uni},
        "xlabel": "truncation degree D", "ylabel": "max residual on degree <= D/2", "title": "Truncation refinement",
    }

    name = "commutant.rep_family"
    rng, seed = _rng(cfg, name)
    fam = [bg.rep_operator([1], np.eye(1), random_heisenberg(s12, rng), 8) for _ in range(20)]
    cr = bg.commutant_scan(fam)
    res.add(name, "commutant of the truncated representation is scalar", cr.dimension, 1, cr.dimension == 1, seed,
            {"block": cr.block_size, "smallest_sv": list(cr.smallest_singular_values)})
    up8, dn8 = bg.creation_annihilation([1], s12, 0, 0, 8)
    cl = bg.commutant_scan([up8, dn8])
    res.add("commutant.ladder", "commutant of the ladder pair is scalar", cl.dimension, 1, cl.dimension == 1)
    ident = bg.BargmannOperator(up8.basis, np.eye(up8.basis.size))
    ci = bg.commutant_scan([ident])
    res.add("commutant.identity", "identity commutes with every matrix", ci.dimension, ci.block_size ** 2,
            ci.dimension == ci.block_size ** 2)

    name = "vacuum_functional"
    rng, seed = _rng(cfg, name)
    basis = bg.make_basis(s12, 10)
    worst = 0.0
    for eps1 in ([1], [-1]):
        for _ in range(3):
            c = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
            qv, f0 = bg.vacuum_functional_check(bg.BargmannVector(basis, c), eps1)
            worst = max(worst, abs(qv - f0))
    res.add(name, "Gaussian mean of a Bargmann function equals its value at 0", worst, 1e-8, worst <= 1e-8, seed, {"D": 10})

    h = HeisenbergElement(s12, np.array([[1j]]), np.array([[0.2]]))
    sep = abs(bg.spherical_function([1], np.array([[1.0]]), h) - bg.spherical_function([1], np.array([[2.0]]), h))
    res.add("spherical.separation", "spherical functions of different fibres differ", sep, "> 1e-3", sep > 1e-3)
    name = "spherical.unit_circle"
    rng, seed = _rng(cfg, name)
    dev = max(abs(abs(bg.spherical_function(eps, random_s(sig, rng), HeisenbergElement(sig, random_heisenberg(sig, rng).n, np.zeros((sig.p, sig.m))))) - 1) for _ in range(50))
    res.add(name, "spherical function at z = 0 has modulus one", dev, 1e-12, dev <= 1e-12, seed)

    s23 = Signature(2, 3)
    name = "tensor_factorisation"
    rng, seed = _rng(cfg, name)
    z1 = np.zeros((2, 1), complex)
    z2 = np.zeros((2, 1), complex)
    z1[0, 0] = 0.2 + 0.1j
    z2[1, 0] = -0.1 + 0.25j
    h1 = HeisenbergElement(s23, np.diag([0.3j, 0]), z1)
    h2 = HeisenbergElement(s23, np.diag([0, -0.2j]), z2)
    D23 = 10
    t1 = bg.rep_operator([1, -1], np.eye(2), h1, D23)
    t2 = bg.rep_operator([1, -1], np.eye(2), h2, D23)
    comm = float(np.max(np.abs((t1 @ t2).block(D23 // 2) - (t2 @ t1).block(D23 // 2))))
    res.add("tensor_factorisation.commute", "row-supported operators commute", comm, 1e-6, comm <= 1e-6, seed)
    # matrix elements of the product factor into one-row elements
    b = t1.basis
    r1 = bg.rep_operator([1], np.eye(1), HeisenbergElement(s12, np.array([[0.3j]]), z1[:1]), D23).matrix
    r2 = bg.rep_operator([-1], np.eye(1), HeisenbergElement(s12, np.array([[-0.2j]]), z2[1:]), D23).matrix
    t12 = (t1 @ t2).matrix
    idx = b.block(D23 // 2)
    fac = max(abs(t12[i, j] - r1[b.indices[i, 0], b.indices[j, 0]] * r2[b.indices[i, 1], b.indices[j, 1]])
              for i in idx for j in idx)
    res.add("tensor_factorisation.elements", "matrix elements are products of one-row elements", fac, 1e-6, fac <= 1e-6, seed)
    return res


# --- special ---------------------------------------------------------------------

def suite_special(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("special")
    p, sig = cfg.p, _sig(cfg)
    name = "characters"
    rng, seed = _rng(cfg, name)
    mod, add = 0.0, 0.0
    for _ in range(1000):
        s, n1, n2 = random_s(sig, rng), random_heisenberg(sig, rng).n, random_heisenberg(sig, rng).n
        c1, c2, c12 = char_eval(cfg.eps, s, n1), char_eval(cfg.eps, s, n2), char_eval(cfg.eps, s, n1 + n2)
        mod = max(mod, abs(abs(c1) - 1))
        add = max(add, abs(c12 - c1 * c2))
    res.add("characters.unit_modulus", "characters take values on the unit circle", mod, 1e-12, mod <= 1e-12, seed)
    res.add("characters.additive", "characters are additive on the centre", add, 1e-12, add <= 1e-12, seed)
    samples = [(random_s(sig, rng), random_heisenberg(sig, rng).n) for _ in range(20)]
    vecs = sign_vectors(p)
    n_sep = sum(orbit_separation(a, b, samples) for i, a in enumerate(vecs) for b in vecs[i + 1:])
    n_pairs = len(vecs) * (len(vecs) - 1) // 2
    res.add("characters.orbits", "the 2^p sign vectors give distinct orbits", n_sep, n_pairs, n_sep == n_pairs, seed)

    nu = power_law_measure(p)
    area = _sphere_orthant_area(p)
    name = "conditions"
    rng, seed = _rng(cfg, name)
    s0s = [random_s(sig, rng, 0.5) for _ in range(3)]
    hs = [random_heisenberg(sig, rng, 0.5) for _ in range(3)]
    rep = special_conditions(nu, gaussian_weight, s0s, hs, _window(cfg), cfg.samples, seed, cfg.eps)
    slope = rep.growth.slope
    ok = abs(slope - area) <= 0.05 * area
    res.add("condition_i.growth_slope", "int f^2 dnu grows like log(1/delta)", slope, f"{area:.6g} +- 5%", ok, seed,
            {"expected": area, "slope_se": rep.growth.slope_se})
    for chk in rep.stability:
        cond = "ii" if chk.label.startswith("s0") else "iii"
        res.add(f"condition_{cond}.window_stability.{chk.label}", f"condition ({cond}) integral is finite",
                chk.ratio, "1 within 3 se", chk.stable(), seed,
                {"at_R": float(np.real(chk.at_R.value)), "at_2R": float(np.real(chk.at_2R.value)), "ratio_se": chk.ratio_se})
    rows_i = [r for r in rep.rows if r.condition == "i"]
    res.plots["condition_i_growth"] = {
        "kind": "errorbar", "x": [math.log(1 / r.window[0]) for r in rows_i], "y": [r.estimate for r in rows_i],
        "yerr": [r.std_error for r in rows_i], "line": [rep.growth.intercept, rep.growth.slope],
        "xlabel": "log(1/delta)", "ylabel": "int f^2 dnu", "title": "Growth of condition (i)",
    }
    res.tables["special_conditions"] = [r.to_dict() for r in rep.rows]

    name = "power_law.shell"
    rng, seed = _rng(cfg, name)
    est = integrate(power_law_measure(1), lambda s: np.exp(-np.abs(s[:, 0, 0]) ** 2), Window(1.0, 2.0), cfg.samples, seed)
    exact = 0.5 * (exp1(1.0) - exp1(4.0))
    z = abs(est.value - exact) / est.std_error
    res.add(name, "shell integral of the power-law measure", est.value, "3 se", z <= 3, seed, {"exact": exact, "se": est.std_error})

    name = "radon_nikodym"
    rng, seed = _rng(cfg, name)
    s2 = Signature(2, 2)
    nu2 = power_law_measure(2)
    one_d = max(abs(float(radon_nikodym(power_law_measure(1), np.array([[rng.uniform(0.1, 5)]]),
                                          np.array([[rng.uniform(0.1, 5)]]))) - 1) for _ in range(20))
    res.add("radon_nikodym.p1_invariant", "ds/s is right invariant on the half-line", one_d, 1e-12, one_d <= 1e-12, seed)
    coc = 0.0
    for _ in range(20):
        s, a, b = random_s(s2, rng), random_s(s2, rng), random_s(s2, rng)
        lhs = radon_nikodym(nu2, s[None], a @ b)[0]
        rhs = radon_nikodym(nu2, s[None], a)[0] * radon_nikodym(nu2, (s @ a)[None], b)[0]
        coc = max(coc, abs(lhs - rhs) / abs(rhs))
    res.add("radon_nikodym.cocycle", "RN(s, s0 s1) = RN(s, s0) RN(s s0, s1)", coc, 1e-10, coc <= 1e-10, seed)
    worst = 0.0
    pts = nu2.sample_window(rng, 10000, Window(1e-3, 1e3))
    for _ in range(20):
        s0 = random_s(s2, rng)
        sup = float(np.max(radon_nikodym(nu2, pts, s0)))
        worst = max(worst, sup / power_law_rn_bound(s0))
    res.add("radon_nikodym.bounded", "power-law RN derivatives stay below the singular-value bound", worst, "<= 1", worst <= 1 + 1e-12, seed)

    exps = right_haar_exponents(p)
    mu = right_haar_measure(p)
    inv = 0.0
    for _ in range(20):
        s, s0 = random_s(sig, rng), random_s(sig, rng)
        inv = max(inv, abs(float(radon_nikodym(mu, s[None], s0)[0]) - 1))
    res.add("right_haar.invariance", "fitted density is right invariant", inv, 1e-10, inv <= 1e-10, seed, {"exponents": list(exps)})

    name = "haar_reweight"
    rng, seed = _rng(cfg, name)
    s0 = random_s(s2, rng, 0.3)
    a = haar_reweight(nu2)
    mu2 = right_haar_measure(2)
    pts = nu2.sample_window(rng, 1000, Window(0.1, 5.0))
    dens = float(np.max(np.abs(a(pts) ** 2 * nu2.density(pts) / mu2.density(pts) - 1)))
    res.add("haar_reweight.density", "|a|^2 equals d mu / d nu", dens, 1e-12, dens <= 1e-12, seed)

    def fs(s):
        # kept away from vanishing diagonal entries, where the generic proposal is thin
        d = np.diagonal(s, axis1=-2, axis2=-1).real
        return gaussian_weight(s @ s0) ** 2 * (d.min(axis=1) >= 0.2)

    w = Window(0.1, 5.0)
    lhs = integrate(nu2, fs, w, cfg.samples, seed)
    rhs = integrate(mu2, lambda s: fs(s) / a(s) ** 2, w, cfg.samples, seed + 1)
    z = abs(lhs.value - rhs.value) / math.hypot(lhs.std_error, rhs.std_error)
    res.add(name, "change of measure to the right Haar measure", z, "<= 3 se", z <= 3, seed,
            {"nu_side": lhs.value, "mu_side": rhs.value, "mu_ess": rhs.ess})
    return res


# --- extension -----------------------------------------------------------------------

def suite_extension(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("extension")
    s12 = Signature(1, 2)
    name = "cocycle.closed_form"
    rng, seed = _rng(cfg, name)
    sig = _sig(cfg)
    D = cfg.degree
    worst = 0.0
    for _ in range(20):
        a, s = random_iwasawa(sig, rng, 0.3), random_s(sig, rng, 1.0)
        worst = max(worst, (cc.cocycle_fiber(a, s, cfg.eps, D) - cc.cocycle_fiber_closed(a, s, cfg.eps, D)).norm())
    res.add(name, "fibre values agree with the direct coherent-state formula", worst, 1e-10, worst <= 1e-10, seed)

    name = "cocycle.identity_fibre"
    rng, seed = _rng(cfg, name)
    pts = power_law_measure(1).sample_window(rng, 100, _window(cfg))
    worst = 0.0
    for _ in range(50):
        g1, g2 = random_iwasawa(s12, rng, 0.15), random_iwasawa(s12, rng, 0.15)
        worst = max(worst, max(cc.cocycle_identity_residual(g1, g2, s, [1], 10) for s in pts))
    res.add(name, "b(g1 g2) = T(g1) b(g2) + b(g1) on sampled fibres", worst, 1e-6, worst <= 1e-6, seed,
            {"pairs": 50, "fibres": 100, "D": 10, "scale": 0.15})

    for s in (Signature(1, 2), Signature(2, 2)):
        name = f"extension.homomorphism.U({s.p},{s.q})"
        rng, seed = _rng(cfg, name)
        bad_hom = bad_coc = bad_k = bad_kk = 0
        for _ in range(50):
            g1, g2 = random_group(s, rng), random_group(s, rng)
            v = cc.CocycleCombination.generator(random_iwasawa(s, rng))
            bad_hom += not cc.act_group(g1, cc.act_group(g2, v)).equals(cc.act_group(g1 @ g2, v))
            lhs = cc.extended_cocycle(g1 @ g2)
            rhs = cc.act_group(g1, cc.extended_cocycle(g2)) + cc.extended_cocycle(g1)
            bad_coc += not lhs.equals(rhs)
            k1, k2 = random_compact(s, rng), random_compact(s, rng)
            bad_k += not cc.extended_cocycle(k1).is_zero()
            bad_kk += not cc.act_compact(k1, cc.act_compact(k2, v)).equals(cc.act_compact(k1 @ k2, v))
        res.add(name, "T(g1) T(g2) = T(g1 g2) on generators", bad_hom, 0, bad_hom == 0, seed, {"pairs": 50})
        res.add(f"extension.cocycle.U({s.p},{s.q})", "extended cocycle satisfies the cocycle identity", bad_coc, 0, bad_coc == 0, seed)
        res.add(f"extension.vanishes_on_K.U({s.p},{s.q})", "B(k) = 0 for k in K", bad_k, 0, bad_k == 0, seed)
        res.add(f"extension.compact_composition.U({s.p},{s.q})", "K acts by a composable relabelling", bad_kk, 0, bad_kk == 0, seed)

    name = "extension.involution"
    rng, seed = _rng(cfg, name)
    w = involution_w(sig)
    v = cc.CocycleCombination.generator(random_iwasawa(sig, rng))
    ok = cc.act_compact(w, cc.act_compact(w, v)).equals(v)
    res.add(name, "the involution acts as an involution on cocycle vectors", ok, True, ok, seed)

    nu = power_law_measure(sig.p)
    name = "gram.injectivity"
    rng, seed = _rng(cfg, name)
    gens = [random_iwasawa(sig, rng, 0.5) for _ in range(5)]
    g = cc.injectivity_evidence(gens, nu, cfg.eps, _window(cfg), cfg.samples, seed)
    ok = g.min_eigenvalue > 3 * g.min_eigenvalue_se
    res.add(name, "cocycle vectors of distinct elements are linearly independent", g.min_eigenvalue,
            "> 3 se", ok, seed, {"se": g.min_eigenvalue_se, "eigenvalues": list(g.eigenvalues)})
    res.plots["gram_spectrum"] = {
        "kind": "bar", "x": list(range(1, len(g.eigenvalues) + 1)), "y": list(g.eigenvalues),
        "xlabel": "index", "ylabel": "eigenvalue", "title": "Gram spectrum of five cocycle vectors", "log": True,
    }
    gd = cc.gram_matrix(gens[:2] + [gens[0]], nu, cfg.eps, _window(cfg), cfg.samples, seed)
    ok = abs(gd.min_eigenvalue) <= max(3 * gd.min_eigenvalue_se, 1e-12)
    res.add("gram.duplicate_singular", "a repeated generator makes the Gram matrix singular", gd.min_eigenvalue,
            "|.| <= 3 se", ok, seed, {"se": gd.min_eigenvalue_se})
    herm = float(np.max(np.abs(g.matrix - dagger(g.matrix))))
    res.add("gram.hermitian", "Gram matrix is Hermitian", herm, 1e-12, herm <= 1e-12, seed)

    name = "gram.translation_norm"
    rng, seed = _rng(cfg, name)
    worst = 0.0
    detail = {}
    for s0 in (0.5, 1.7, 3.0):
        est = cc.gram_matrix([cc.s_translation(s12, np.array([[s0]]))], power_law_measure(1), [1], _window(cfg),
                             cfg.samples, seed)
        exact = cc.translation_norm_closed(s0)
        z = abs(est.matrix[0, 0].real - exact) / est.std_error[0, 0]
        worst = max(worst, z)
        detail[f"s0={s0}"] = [float(est.matrix[0, 0].real), exact]
    res.add(name, "norm of a pure translation cocycle matches its closed form", worst, "<= 3 se", worst <= 3, seed, detail)
    return res


# --- quasi-Poisson ------------------------------------------------------------------

def qp_window(cfg: RunConfig) -> Window:
    """Configured window for p = 1; a narrower one for p >= 2 to keep point counts small."""
    if cfg.p == 1:
        return _window(cfg)
    return Window(max(cfg.window_min, 0.3), min(cfg.window_max, 3.0))


def suite_qp(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("qp")
    p, W = cfg.p, qp_window(cfg)
    triples = [qp.half_square_triple(p, W), qp.zero_triple(p, W), qp.square_triple(p, W)]
    name = "cf"
    for t in triples:
        for f in qp.canonical_test_functions():
            nm = f"cf.{t.name}.{f.name}"
            seed = seed_for(cfg, nm)
            c = qp.characteristic_functional_check(t, f, cfg.samples, seed)
            res.add(nm, "characteristic functional of the quasi-Poisson measure", c.mc, "closed within 3 se",
                    c.passed(), seed, {"closed": c.closed, "se": c.std_error, "z": c.z_score})
    # running mean for the plot
    t = triples[0]
    f = qp.canonical_test_functions()[3]
    seed = seed_for(cfg, "cf.convergence")
    batch = qp.sample_configurations(t, np.random.default_rng(seed), cfg.samples)
    vals = math.exp(batch.log_weight) * np.exp(-batch.sum_per_config(f(batch.s, batch.x)))
    ns = np.unique(np.geomspace(100, cfg.samples, 30).astype(int))
    run = np.cumsum(vals)[ns - 1] / ns
    res.plots["cf_convergence"] = {
        "kind": "semilogx", "x": ns.tolist(), "series": {"Monte Carlo": run.tolist()}, "ref": math.exp(f.closed_exponent(t)),
        "xlabel": "configurations", "ylabel": "characteristic functional", "title": "Characteristic functional, f = u",
    }

    name = "poisson.void_and_moments"
    rng, seed = _rng(cfg, name)
    t0 = qp.zero_triple(p, W)
    batch = qp.sample_configurations(t0, np.random.default_rng(seed), cfg.samples)
    zv, zm, zvar = 0.0, 0.0, 0.0
    for _ in range(10):
        r = np.sort(np.exp(rng.uniform(math.log(W.delta), math.log(W.R), 2)))
        x = np.sort(rng.uniform(0, 1, 2))
        st = qp.poisson_stats(t0, batch, r[0], r[1], x[0], x[1])
        zv = max(zv, abs(st.void_prob - st.void_expected) / max(st.void_se, 1e-300))
        zm = max(zm, abs(st.mean_count - st.expected_count) / max(st.count_se, 1e-300))
        var_se = math.sqrt((st.expected_count + 2 * st.expected_count**2) / batch.n_configs)
        zvar = max(zvar, abs(st.var_count - st.expected_count) / max(var_se, 1e-300))
    # ten z-scores each: allow the 3-sigma band with a Bonferroni margin
    lim = 3.5
    res.add("poisson.void_probability", "void probabilities equal exp(-mu(B))", zv, f"<= {lim} se", zv <= lim, seed)
    res.add("poisson.count_mean", "mean counts equal mu(B)", zm, f"<= {lim} se", zm <= lim, seed)
    res.add("poisson.count_variance", "count variance equals mu(B)", zvar, f"<= {lim} se", zvar <= lim, seed)
    r_mid = math.sqrt(W.delta * W.R)
    cov, cse = qp.count_covariance(batch, (W.delta, r_mid, 0, 0.5), (r_mid, W.R, 0.5, 1.0))
    cov2, cse2 = qp.count_covariance(batch, (W.delta, W.R, 0, 0.4), (W.delta, W.R, 0.4, 1.0))
    z = max(abs(cov) / cse, abs(cov2) / cse2)
    res.add("poisson.independence", "counts in disjoint boxes are uncorrelated", z, "<= 3 se", z <= 3, seed)
    empty = qp.sample_configurations(t0, np.random.default_rng(0), 3, thin=lambda s, x: np.zeros(len(x)))
    res.add("poisson.empty_thinning", "thinning with zero intensity gives empty configurations",
            len(empty.x), 0, len(empty.x) == 0, None, {"mean_count": float(batch.counts().mean())})

    name = "quasi_invariance"
    rng, seed = _rng(cfg, name)
    t = qp.half_square_triple(p, W)
    sig = _sig(cfg)
    s0 = np.array([[1.6]]) if p == 1 else random_s(sig, rng, 0.2)
    field = lambda x: np.broadcast_to(s0, (len(x),) + s0.shape)  # noqa: E731
    devs = qp.canonical_test_functions()[:3]
    reps = []
    for i, w in enumerate((W, W.scaled(R=2 * W.R))):
        reps.append(qp.quasi_invariance_estimate(t.with_window(w), field, devs, [(1.0, s0)], cfg.samples, seed + i))
    j2 = reps[0].j2_mc
    j2q = reps[0].j2_quadrature
    z = abs(j2.ratio - j2q.value) / math.hypot(j2.std_error, j2q.std_error)
    res.add("quasi_invariance.j2", "zero-deviation ratio equals the J2 factor", j2.ratio, "quadrature within 3 se", z <= 3,
            seed, {"quadrature": j2q.value, "se": j2.std_error, "z": z})
    worst = 0.0
    for a, b in zip(reps[0].ratios, reps[1].ratios):
        worst = max(worst, abs(a.ratio - b.ratio) / math.hypot(a.std_error, b.std_error))
    finite = all(math.isfinite(r.ratio) for rp in reps for r in rp.ratios)
    res.add("quasi_invariance.window_stability", "translated/original ratio is finite and window stable", worst,
            "<= 3 se", finite and worst <= 3, seed, {"bound": reps[0].bound, "bound_2R": reps[1].bound})
    e = np.eye(p)
    rid = qp.quasi_invariance_estimate(t, lambda x: np.broadcast_to(e, (len(x), p, p)), devs, [(1.0, e)], 500, seed)
    dev = max(abs(r.ratio - 1) for r in rid.ratios)
    res.add("quasi_invariance.identity", "identity translation leaves the functional unchanged", dev, 1e-12, dev <= 1e-12, seed)
    return res


# --- currents ---------------------------------------------------------------------------

def suite_currents(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("currents")
    sig, eps = _sig(cfg), cfg.eps
    n = cfg.samples
    t = cu.vacuum_triple(sig.p, qp_window(cfg) if sig.p > 1 else _window(cfg))
    one = cu.expectation_functional(cu.StepCurrent.identity(sig), t, 200, 0, eps)
    res.add("phi.identity", "vacuum coefficient of the identity current", one.value, 0.0, one.value == 1, 0)

    name = "phi.factorisation"
    rng, seed = _rng(cfg, name)
    worst = 0.0
    for i in range(10):
        g1 = cu.random_current(sig, rng, lo=0.0, hi=0.5, scale=0.5)
        g2 = cu.random_current(sig, rng, lo=0.5, hi=1.0, scale=0.5)
        sd = seed_for(cfg, f"{name}.{i}")
        a = cu.expectation_functional(g1 @ g2, t, n, sd, eps)
        b = cu.expectation_functional(g1, t, n, sd + 1, eps)
        c = cu.expectation_functional(g2, t, n, sd + 2, eps)
        se = math.sqrt(a.std_error**2 + abs(c.value) ** 2 * b.std_error**2 + abs(b.value) ** 2 * c.std_error**2)
        worst = max(worst, abs(a.value - b.value * c.value) / se)
    res.add(name, "matrix coefficients factor over disjoint supports", worst, "<= 3 se", worst <= 3, seed, {"pairs": 10})

    name = "phi.closed_form"
    rng, seed = _rng(cfg, name)
    worst = 0.0
    for i in range(3):
        g = cu.random_current(sig, rng, scale=0.5)
        a = cu.expectation_functional(g, t, n, seed + i, eps)
        b = cu.expectation_closed(g, t, eps, seed=seed + 10 + i)
        worst = max(worst, abs(a.value - b.value) / math.hypot(a.std_error, b.std_error))
    res.add(name, "Monte Carlo coefficient matches the exponential formula", worst, "<= 3 se", worst <= 3, seed)

    name = "phi.heisenberg_bounded"
    rng, seed = _rng(cfg, name)
    worst = -math.inf
    for i in range(3):
        vals = tuple(IwasawaElement.from_parts(np.eye(sig.p), random_heisenberg(sig, rng)) for _ in range(2))
        g = cu.StepCurrent(sig, "iwasawa", (0.0, 0.5, 1.0), vals)
        a = cu.expectation_functional(g, t, n, seed + i, eps)
        worst = max(worst, abs(a.value) - 1 - 3 * a.std_error)
    res.add(name, "|Phi| <= 1 for Heisenberg-valued currents", worst, "<= 0", worst <= 0, seed)

    name = "pairing.single_fibre"
    rng, seed = _rng(cfg, name)
    err = 0.0
    D = cfg.degree
    for _ in range(10):
        a = random_iwasawa(sig, rng, 0.3)
        s = random_s(sig, rng)
        omega = qp.Configuration(s[None], np.array([rng.uniform()]))
        val = cu.pair_against_vacuum(cu.StepCurrent.constant(a), omega, eps)
        ss0 = s @ a.s
        direct = (np.exp(-0.5 * np.sum(np.abs(ss0) ** 2) + 0.5 * np.sum(np.abs(s) ** 2))
                  * bg.rep_operator(eps, ss0, a.h, D).matrix[0, 0])
        err = max(err, abs(val - direct))
    empty = cu.pair_against_vacuum(cu.random_current(sig, rng), qp.Configuration(np.zeros((0, sig.p, sig.p)), np.zeros(0)), eps)
    res.add(name, "one-point pairing equals the fibre matrix element", err, 1e-12, err <= 1e-12, seed)
    res.add("pairing.empty", "empty configuration pairs to one", empty, 0.0, empty == 1, seed)

    name = "current.group_laws"
    rng, seed = _rng(cfg, name)
    assoc, inv_ok, pieces_ok = 0.0, True, True
    for _ in range(10):
        a, b, c = (cu.random_current(sig, rng) for _ in range(3))
        assoc = max(assoc, ((a @ b) @ c).distance(a @ (b @ c)))
        inv_ok &= (a @ a.inv()).is_identity(1e-10)
        pieces_ok &= (a @ b).n_pieces <= a.n_pieces + b.n_pieces
    res.add("current.associativity", "pointwise product is associative", assoc, 1e-10, assoc <= 1e-10, seed)
    res.add("current.inverse", "a a^-1 is the identity current", inv_ok, True, inv_ok, seed)
    res.add("current.refinement_bound", "pieces(a b) <= pieces(a) + pieces(b)", pieces_ok, True, pieces_ok, seed)

    name = "current.homomorphism"
    rng, seed = _rng(cfg, name)
    bad = bad_k = bad_loc = 0
    for _ in range(20):
        g1, g2 = cu.random_current(sig, rng, "group"), cu.random_current(sig, rng, "group")
        v = cu.CurrentCocycleCombination.generator(cu.random_current(sig, rng))
        bad += not cu.act_current_group(g1, cu.act_current_group(g2, v)).equals(cu.act_current_group(g1 @ g2, v))
        k1, k2 = cu.random_current(sig, rng, "compact"), cu.random_current(sig, rng, "compact")
        bad_k += not cu.act_current_compact(k1, cu.act_current_compact(k2, v)).equals(cu.act_current_compact(k1 @ k2, v))
        h1 = cu.random_current(sig, rng, "group", lo=0.0, hi=0.4)
        h2 = cu.random_current(sig, rng, "group", lo=0.4, hi=1.0)
        bad_loc += not cu.act_current_group(h1, cu.act_current_group(h2, v)).equals(
            cu.act_current_group(h2, cu.act_current_group(h1, v)))
    res.add(name, "current operators compose like the pointwise product", bad, 0, bad == 0, seed, {"pairs": 20})
    res.add("current.compact_homomorphism", "K-valued currents act by composable relabelling", bad_k, 0, bad_k == 0, seed)
    res.add("current.locality", "operators of disjointly supported currents commute", bad_loc, 0, bad_loc == 0, seed)

    name = "current.centre"
    rng, seed = _rng(cfg, name)
    v = cu.CurrentCocycleCombination.generator(cu.random_current(sig, rng))
    z = cu.central_current(sig, (0.0, 0.3, 0.7, 1.0), tuple(rng.uniform(0, 2 * np.pi, 3)))
    ok = cu.act_current_compact(z, v).equals(v) and cu.act_current_group(
        cu.StepCurrent(sig, "group", z.breaks, z.values), v).equals(v)
    res.add(name, "central currents act trivially", ok, True, ok, seed)

    name = "current.constant_consistency"
    rng, seed = _rng(cfg, name)
    same = True
    for _ in range(10):
        g, a = random_group(sig, rng), random_iwasawa(sig, rng)
        A = cu.act_current_group(cu.StepCurrent.constant(g), cu.CurrentCocycleCombination.generator(cu.StepCurrent.constant(a)))
        B = cc.act_group(g, cc.CocycleCombination.generator(a))
        same &= len(A) == len(B) and all(
            ca == cb and np.array_equal(pa.values[0].coords(), pb.coords()) for (ca, pa), (cb, pb) in zip(A.terms, B.terms))
        b2 = random_iwasawa(sig, rng)
        prod = cu.StepCurrent.constant(a) @ cu.StepCurrent.constant(b2)
        same &= np.array_equal(prod.values[0].coords(), p_mul(a, b2).coords())
    res.add(name, "single-piece currents reproduce group-level results exactly", same, True, same, seed)
    return res


SUITES: dict[str, Callable[[RunConfig], SuiteResult]] = {
    "group": suite_group,
    "iwasawa": suite_iwasawa,
    "bargmann": suite_bargmann,
    "special": suite_special,
    "extension": suite_extension,
    "qp": suite_qp,
    "currents": suite_currents,
}


def run_suites(cfg: RunConfig) -> list[SuiteResult]:
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    return [SUITES[n](cfg) for n in names]
