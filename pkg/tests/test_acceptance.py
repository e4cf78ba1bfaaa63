"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed in the terminal
summary (see conftest.py) and immediately when run with ``-s``.
"""

import math
import time

import numpy as np
import pytest

from upq_currents import bargmann as bg
from upq_currents import cli
from upq_currents import cocycle as cc
from upq_currents import currents as cu
from upq_currents import quasi_poisson as qp
from upq_currents.config import RunConfig
from upq_currents.group import Signature, is_compact, is_member, lie_algebra_dimension, random_compact
from upq_currents.iwasawa import (
    HeisenbergElement,
    embed,
    heis_mul,
    iwasawa_decompose,
    random_group,
    random_heisenberg,
    random_iwasawa,
    random_s,
)
from upq_currents.measures import Window, gaussian_weight, power_law_measure
from upq_currents.special import special_conditions

RESULTS: list[str] = []
SIGS = [Signature(p, q) for q in range(1, 4) for p in range(1, q + 1)]


def record(n: int, ok: bool, text: str):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _small_heis(sig, rng, bound=0.3):
    h = random_heisenberg(sig, rng)
    n = h.n / np.linalg.norm(h.n) * bound
    z = h.z / np.linalg.norm(h.z) * bound
    return HeisenbergElement(sig, n, z)


def test_c01_dimensions():
    t0 = time.perf_counter()
    expected = {
        "full": lambda p, q: (p + q) ** 2,
        "heisenberg": lambda p, q: p * (2 * q - p),
        "iwasawa": lambda p, q: 2 * p * q,
        "compact": lambda p, q: p * p + q * q,
    }
    bad = [(s, k) for s in SIGS for k, f in expected.items() if lie_algebra_dimension(s, k) != f(s.p, s.q)]
    dt = time.perf_counter() - t0
    record(1, not bad and dt < 1.0, f"dimension counts for 1 <= p <= q <= 3, mismatches={len(bad)}, {dt:.2f} s (< 1 s)")


def test_c02_membership_closure():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(1000):
        sig = SIGS[i % len(SIGS)]
        a, b = random_group(sig, rng), random_group(sig, rng)
        worst = max(worst, is_member(a @ b, sig).residual, is_member(a.inv(), sig).residual)
    dt = time.perf_counter() - t0
    record(2, worst <= 1e-8 and dt < 5.0, f"1000 products and inverses, max residual {worst:.2e} (<= 1e-8), {dt:.2f} s (< 5 s)")


def test_c03_iwasawa_round_trip():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst, unique = 0.0, True
    for i in range(500):
        sig = SIGS[i % len(SIGS)]
        a, k = random_iwasawa(sig, rng), random_compact(sig, rng)
        g = embed(a) @ k
        a2, k2 = iwasawa_decompose(g)
        worst = max(worst, a.distance(a2), float(np.max(np.abs(k.m - k2.m))))
        a3, k3 = iwasawa_decompose(g)
        unique &= np.array_equal(a2.coords(), a3.coords()) and np.array_equal(k2.m, k3.m) and is_compact(k2, sig)
    dt = time.perf_counter() - t0
    record(3, worst <= 1e-8 and unique and dt < 5.0,
           f"500 round trips, max error {worst:.2e} (<= 1e-8), repeat-identical={unique}, {dt:.2f} s (< 5 s)")


def test_c04_heisenberg_axioms():
    rng = np.random.default_rng(4)
    assoc, central = 0.0, 0.0
    for i in range(1000):
        sig = SIGS[i % len(SIGS)]
        a, b, c = (random_heisenberg(sig, rng) for _ in range(3))
        l, r = heis_mul(heis_mul(a, b), c), heis_mul(a, heis_mul(b, c))
        assoc = max(assoc, float(np.max(np.abs(l.n - r.n), initial=0)), float(np.max(np.abs(l.z - r.z), initial=0)))
        comm = heis_mul(heis_mul(a, b), heis_mul(b, a).inv())
        central = max(central, float(np.max(np.abs(comm.z), initial=0)))
        for x in (a, b, c):
            # commutators lie in the centre, which commutes with everything
            zc = HeisenbergElement(sig, comm.n, np.zeros_like(comm.z))
            d1, d2 = heis_mul(zc, x), heis_mul(x, zc)
            central = max(central, float(np.max(np.abs(d1.n - d2.n))), float(np.max(np.abs(d1.z - d2.z), initial=0)))
    ok = assoc <= 1e-13 and central <= 1e-13
    record(4, ok, f"1000 triples, associativity {assoc:.1e}, commutator centrality {central:.1e} (rounding level)")


def test_c05_bargmann():
    t0 = time.perf_counter()
    sig = Signature(1, 2)
    rng = np.random.default_rng(5)
    sph = 0.0
    for _ in range(50):
        h = _small_heis(sig, rng)
        chi = np.exp(np.trace(h.n - 0.5 * h.z @ h.z.conj().T))
        sph = max(sph, abs(bg.rep_operator([1], np.eye(1), h, 12).matrix[0, 0] - chi))
    up, dn = bg.creation_annihilation([1], sig, 0, 0, 12)
    idx = up.basis.block(11)
    ccr = float(np.max(np.abs((dn.matrix @ up.matrix - up.matrix @ dn.matrix)[np.ix_(idx, idx)] - np.eye(len(idx)))))
    a, b = _small_heis(sig, rng), _small_heis(sig, rng)
    resid = [bg.group_law_residual([1], np.eye(1), a, b, d) for d in (6, 8, 10, 12)]
    mono = all(x > y for x, y in zip(resid, resid[1:]))
    fam = [bg.rep_operator([1], np.eye(1), random_heisenberg(sig, rng), 8) for _ in range(20)]
    dim = bg.commutant_scan(fam).dimension
    dt = time.perf_counter() - t0
    ok = sph <= 1e-6 and ccr <= 1e-12 and mono and dim == 1 and dt < 60
    record(5, ok, f"(a) spherical {sph:.1e} (<= 1e-6) (b) CCR {ccr:.0e} (<= 1e-12) (c) monotone {mono} "
                  f"[{', '.join(f'{r:.1e}' for r in resid)}] (d) commutant dim {dim}, {dt:.1f} s")


def test_c06_special_conditions():
    t0 = time.perf_counter()
    sig = Signature(1, 2)
    rng = np.random.default_rng(6)
    s0s = [random_s(sig, rng) for _ in range(3)]
    hs = [random_heisenberg(sig, rng) for _ in range(3)]
    rep = special_conditions(power_law_measure(1), gaussian_weight, s0s, hs, Window(1e-3, 10.0), 20000, 6)
    slope_ok = abs(rep.growth.slope - 1) <= 0.05
    stable = all(c.stable(3.0) for c in rep.stability)
    dt = time.perf_counter() - t0
    record(6, slope_ok and stable and dt < 60,
           f"growth slope {rep.growth.slope:.4f} (1 +- 0.05), {len(rep.stability)} R/2R ratios "
           f"{'all' if stable else 'not all'} within 3 se, {dt:.1f} s")


def test_c07_cocycle_identity():
    rng = np.random.default_rng(7)
    sig = Signature(1, 2)
    pts = power_law_measure(1).sample_window(rng, 100, Window(1e-3, 10.0))
    worst = 0.0
    for _ in range(50):
        g1, g2 = random_iwasawa(sig, rng, 0.15), random_iwasawa(sig, rng, 0.15)
        worst = max(worst, max(cc.cocycle_identity_residual(g1, g2, s, [1], 10) for s in pts))
    record(7, worst <= 1e-6, f"50 pairs x 100 fibres at D = 10, max residual {worst:.2e} (<= 1e-6)")


def test_c08_extension_homomorphism():
    bad = 0
    for sig in (Signature(1, 2), Signature(2, 2)):
        rng = np.random.default_rng(8 + sig.p)
        for _ in range(50):
            g1, g2 = random_group(sig, rng), random_group(sig, rng)
            v = cc.CocycleCombination.generator(random_iwasawa(sig, rng))
            bad += not cc.act_group(g1, cc.act_group(g2, v)).equals(cc.act_group(g1 @ g2, v))
            bad += not cc.extended_cocycle(random_compact(sig, rng)).is_zero()
    record(8, bad == 0, f"50 pairs in U(1,2) and U(2,2) plus B(k) = 0, failures {bad}")


def test_c09_gram_independence():
    rng = np.random.default_rng(9)
    sig = Signature(1, 2)
    gens = [random_iwasawa(sig, rng) for _ in range(5)]
    g = cc.injectivity_evidence(gens, power_law_measure(1), [1], Window(1e-3, 10.0), 20000, 9)
    ok = g.min_eigenvalue > 3 * g.min_eigenvalue_se
    record(9, ok, f"smallest Gram eigenvalue {g.min_eigenvalue:.3e} vs 3 se = {3 * g.min_eigenvalue_se:.1e}")


def test_c10_quasi_poisson_cf():
    w = Window(1e-3, 10.0)
    worst = 0.0
    for i, f in enumerate(qp.canonical_test_functions()):
        for t in (qp.half_square_triple(1, w), qp.zero_triple(1, w)):
            worst = max(worst, qp.characteristic_functional_check(t, f, 20000, 1000 + i).z_score)
    t0 = qp.zero_triple(1, w)
    batch = qp.sample_configurations(t0, np.random.default_rng(10), 20000)
    st = qp.poisson_stats(t0, batch, 0.5, 2.0, 0.0, 0.5)
    zv = abs(st.void_prob - st.void_expected) / st.void_se
    zm = abs(st.mean_count - st.expected_count) / st.count_se
    var_ok = abs(st.var_count / st.expected_count - 1) <= 0.05
    ok = worst <= 3 and zv <= 3 and zm <= 3 and var_ok
    record(10, ok, f"5 test functions, max CF z-score {worst:.2f} (<= 3); u = 0 void z {zv:.2f}, "
                   f"mean z {zm:.2f}, var/mean {st.var_count / st.expected_count:.3f}")


def test_c11_quasi_invariance():
    t = qp.half_square_triple(1, Window(1e-3, 10.0))
    s0 = np.array([[1.6]])
    field = lambda x: np.broadcast_to(s0, (len(x), 1, 1))  # noqa: E731
    devs = qp.canonical_test_functions()[:3]
    a = qp.quasi_invariance_estimate(t, field, devs, [(1.0, s0)], 20000, 11)
    b = qp.quasi_invariance_estimate(t.with_window(Window(1e-3, 20.0)), field, devs, [(1.0, s0)], 20000, 12)
    finite = all(math.isfinite(r.ratio) for r in a.ratios + b.ratios)
    stab = max(abs(x.ratio - y.ratio) / math.hypot(x.std_error, y.std_error) for x, y in zip(a.ratios, b.ratios))
    zj = abs(a.j2_mc.ratio - a.j2_quadrature.value) / math.hypot(a.j2_mc.std_error, a.j2_quadrature.std_error)
    record(11, finite and stab <= 3 and zj <= 3,
           f"ratios finite={finite}, R vs 2R max z {stab:.2f} (<= 3), J2 {a.j2_mc.ratio:.4f} vs "
           f"quadrature {a.j2_quadrature.value:.4f}, z {zj:.2f} (<= 3)")


def test_c12_current_factorisation():
    sig = Signature(1, 2)
    rng = np.random.default_rng(12)
    t = cu.vacuum_triple(1, Window(1e-3, 10.0))
    worst = 0.0
    for i in range(10):
        g1 = cu.random_current(sig, rng, lo=0.0, hi=0.5)
        g2 = cu.random_current(sig, rng, lo=0.5, hi=1.0)
        a = cu.expectation_functional(g1 @ g2, t, 20000, 100 + 3 * i)
        b = cu.expectation_functional(g1, t, 20000, 101 + 3 * i)
        c = cu.expectation_functional(g2, t, 20000, 102 + 3 * i)
        se = math.sqrt(a.std_error**2 + abs(c.value) ** 2 * b.std_error**2 + abs(b.value) ** 2 * c.std_error**2)
        worst = max(worst, abs(a.value - b.value * c.value) / se)
    same = True
    for _ in range(10):
        g, p = random_group(sig, rng), random_iwasawa(sig, rng)
        A = cu.act_current_group(cu.StepCurrent.constant(g), cu.CurrentCocycleCombination.generator(cu.StepCurrent.constant(p)))
        B = cc.act_group(g, cc.CocycleCombination.generator(p))
        same &= len(A) == len(B) and all(
            ca == cb and np.array_equal(pa.values[0].coords(), pb.coords()) for (ca, pa), (cb, pb) in zip(A.terms, B.terms))
    record(12, worst <= 3 and same, f"10 disjoint pairs, max z {worst:.2f} (<= 3); constant currents bit-identical={same}")


def test_c13_determinism(tmp_path):
    times, outputs = [], []
    out = tmp_path / "reports"
    for _ in range(2):
        t0 = time.perf_counter()
        report, _ = cli.run(RunConfig(suite="all", seed=42, out_dir=str(out)))
        times.append(time.perf_counter() - t0)
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    same = outputs[0] == outputs[1]
    ok = same and report["passed"] and max(times) <= 600
    record(13, ok, f"two full runs byte-identical={same}, all suites passed={report['passed']}, "
                   f"wall {times[0]:.0f} s and {times[1]:.0f} s (<= 600 s)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
