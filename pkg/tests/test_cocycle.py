import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.integrate import quad

from conftest import seeds
from upq_currents.bargmann import make_basis, spherical_function
from upq_currents.cocycle import (
    CocycleCombination,
    GramCache,
    act_compact,
    act_group,
    act_iwasawa,
    apply_p_fiber,
    cocycle_fiber,
    cocycle_fiber_closed,
    cocycle_identity_residual,
    extended_cocycle,
    fiber_inner_products,
    gram,
    gram_matrix,
    injectivity_evidence,
    reference_weight,
    s_translation,
    translation_norm_closed,
)
from upq_currents.errors import InvalidInput
from upq_currents.group import GroupElement, Signature, involution_w, random_compact
from upq_currents.iwasawa import (
    IwasawaElement,
    embed,
    iwasawa_decompose,
    p_mul,
    random_group,
    random_heisenberg,
    random_iwasawa,
    random_s,
)
from upq_currents.measures import Window, power_law_measure

S12, S22, S23 = Signature(1, 2), Signature(2, 2), Signature(2, 3)

# independent quadrature of int_0^inf (exp(-s0^2 r^2/2) - exp(-r^2/2))^2 dr/r at s0 = 1.7
TRANSLATION_NORM_1_7 = 0.1346337260082392


def test_identity_has_zero_cocycle(rng):
    v = cocycle_fiber(IwasawaElement.identity(S12), random_s(S12, rng), None, 8)
    assert v.norm() == 0.0


def test_pure_heisenberg_vacuum_component(rng):
    h = random_heisenberg(S12, rng)
    p = IwasawaElement.from_parts(np.eye(1), h)
    s = random_s(S12, rng)
    v = cocycle_fiber(p, s, [1], 10)
    expected = float(reference_weight(s)) * (spherical_function([1], s, h) - 1)
    assert abs(v.coeffs[0] - expected) <= 1e-14


@given(seeds)
def test_closed_form_matches_composition(seed):
    rng = np.random.default_rng(seed)
    for sig in (S12, S23):
        eps = rng.choice([-1, 1], size=sig.p)
        p, s = random_iwasawa(sig, rng, 0.5), random_s(sig, rng, 1.0)
        a = cocycle_fiber(p, s, eps, 6)
        b = cocycle_fiber_closed(p, s, eps, 6)
        assert (a - b).norm() <= 1e-10


@settings(max_examples=10)
@given(seeds)
def test_cocycle_identity_on_fibres(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = random_iwasawa(S12, rng, 0.15), random_iwasawa(S12, rng, 0.15)
    pts = power_law_measure(1).sample_window(rng, 10, Window())
    for s in pts:
        assert cocycle_identity_residual(g1, g2, s, [1], 10) <= 1e-6


def test_cocycle_identity_residual_shrinks_with_degree(rng):
    g1, g2 = random_iwasawa(S12, rng, 0.3), random_iwasawa(S12, rng, 0.3)
    s = np.array([[1.0]])
    res = [cocycle_identity_residual(g1, g2, s, [1], D) for D in (6, 10, 14)]
    assert res[0] > res[1] > res[2]


def test_truncated_norms_approach_exact_inner_product(rng):
    p = random_iwasawa(S12, rng, 1.0)
    s = np.array([[1.5]])
    exact = fiber_inner_products([p], s[None], [1])[0, 0, 0].real
    gaps = [abs(cocycle_fiber(p, s, [1], D).norm() ** 2 - exact) for D in (4, 8, 16)]
    assert gaps[0] > gaps[1] and gaps[2] <= 1e-10


def test_degree_floor():
    with pytest.raises(InvalidInput):
        cocycle_fiber(IwasawaElement.identity(S12), np.eye(1), None, 3)


# --- formal module ---------------------------------------------------------------

@given(seeds)
def test_act_iwasawa_composes(seed):
    rng = np.random.default_rng(seed)
    g1, g2, p = (random_iwasawa(S23, rng) for _ in range(3))
    v = CocycleCombination.generator(p)
    assert act_iwasawa(IwasawaElement.identity(S23), v).equals(v)
    assert act_iwasawa(g1, act_iwasawa(g2, v)).equals(act_iwasawa(p_mul(g1, g2), v))


def test_act_iwasawa_matches_fibre_action(rng):
    g, p = random_iwasawa(S12, rng, 0.15), random_iwasawa(S12, rng, 0.15)
    v = act_iwasawa(g, CocycleCombination.generator(p))
    for s in power_law_measure(1).sample_window(rng, 20, Window(0.1, 5.0)):
        direct = apply_p_fiber(g, lambda x: cocycle_fiber(p, x, [1], 10), s, [1], 10)
        assert (v.fiber(s, [1], 10) - direct).norm() <= 1e-6


@given(seeds)
def test_act_compact_composes(seed):
    rng = np.random.default_rng(seed)
    for sig in (S12, S22):
        k1, k2 = random_compact(sig, rng), random_compact(sig, rng)
        v = CocycleCombination.generator(random_iwasawa(sig, rng))
        assert act_compact(GroupElement.identity(sig), v).equals(v)
        assert act_compact(k1, act_compact(k2, v)).equals(act_compact(k1 @ k2, v))


def test_involution_action(rng):
    w = involution_w(S12)
    p = random_iwasawa(S12, rng)
    v = act_compact(w, CocycleCombination.generator(p))
    pprime, _ = iwasawa_decompose(w @ embed(p))
    assert v.equals(CocycleCombination.generator(pprime))
    assert act_compact(w, v).equals(CocycleCombination.generator(p))


def test_act_compact_rejects_non_unitary(rng):
    g = embed(random_iwasawa(S12, rng))
    with pytest.raises(InvalidInput):
        act_compact(g, CocycleCombination.generator(random_iwasawa(S12, rng)))


@given(seeds)
def test_act_group_homomorphism(seed):
    rng = np.random.default_rng(seed)
    for sig in (S12, S22):
        g1, g2 = random_group(sig, rng), random_group(sig, rng)
        v = CocycleCombination.generator(random_iwasawa(sig, rng))
        assert act_group(g1, act_group(g2, v)).equals(act_group(g1 @ g2, v))


def test_act_group_on_p_is_act_iwasawa(rng):
    g = random_iwasawa(S23, rng)
    v = CocycleCombination.generator(random_iwasawa(S23, rng))
    assert act_group(embed(g), v).equals(act_iwasawa(g, v))


@given(seeds)
def test_extended_cocycle(seed):
    rng = np.random.default_rng(seed)
    for sig in (S12, S22):
        p, k = random_iwasawa(sig, rng), random_compact(sig, rng)
        assert extended_cocycle(k).is_zero()
        assert extended_cocycle(embed(p) @ k).equals(CocycleCombination.generator(p))
        g1, g2 = random_group(sig, rng), random_group(sig, rng)
        lhs = extended_cocycle(g1 @ g2)
        assert lhs.equals(act_group(g1, extended_cocycle(g2)) + extended_cocycle(g1))


def test_combination_algebra(rng):
    p, q = random_iwasawa(S12, rng), random_iwasawa(S12, rng)
    a = CocycleCombination.generator(p, 2.0)
    b = CocycleCombination.generator(q)
    assert len(a + b) == 2
    assert (a - a).is_zero()
    assert (a + a).equals(a.scale(2.0))
    assert CocycleCombination.generator(IwasawaElement.identity(S12)).is_zero()
    assert CocycleCombination.zero(S12).is_zero()
    back = CocycleCombination.from_dict((a + b).to_dict())
    assert back.equals(a + b)


# --- Gram matrices --------------------------------------------------------------

def test_gram_identity_is_zero():
    e = IwasawaElement.identity(S12)
    est = gram(e, e, power_law_measure(1), [1], Window(), 500, 0)
    assert abs(est.value) <= 1e-15


def test_translation_norm_oracle():
    f = lambda r: (math.exp(-0.5 * 1.7**2 * r * r) - math.exp(-0.5 * r * r)) ** 2 / r  # noqa: E731
    assert quad(f, 0, math.inf, limit=200)[0] == pytest.approx(TRANSLATION_NORM_1_7, rel=1e-10)
    assert translation_norm_closed(1.7) == pytest.approx(TRANSLATION_NORM_1_7, rel=1e-12)


@pytest.mark.parametrize("s0", [0.5, 1.7, 3.0])
def test_translation_norm_monte_carlo(s0):
    g = gram_matrix([s_translation(S12, np.array([[s0]]))], power_law_measure(1), [1], Window(), 20000, 4)
    assert abs(g.matrix[0, 0].real - translation_norm_closed(s0)) <= 3 * g.std_error[0, 0]


def test_gram_properties(rng):
    nu = power_law_measure(1)
    ps = [random_iwasawa(S12, rng, 0.5) for _ in range(5)]
    g = injectivity_evidence(ps, nu, [1], Window(), 20000, 0)
    assert np.allclose(g.matrix, g.matrix.conj().T)
    assert np.all(np.diag(g.matrix).real > 0)
    assert g.min_eigenvalue > 3 * g.min_eigenvalue_se
    dup = gram_matrix(ps[:2] + [ps[0]], nu, [1], Window(), 20000, 0)
    assert abs(dup.min_eigenvalue) <= max(3 * dup.min_eigenvalue_se, 1e-12)


def test_gram_hermitian_swap(rng):
    nu = power_law_measure(1)
    p1, p2 = random_iwasawa(S12, rng), random_iwasawa(S12, rng)
    a = gram(p1, p2, nu, [1], Window(), 5000, 3)
    b = gram(p2, p1, nu, [1], Window(), 5000, 3)
    assert a.value == pytest.approx(np.conj(b.value), abs=1e-12)


def test_gram_cache(rng):
    nu = power_law_measure(1)
    p1, p2 = random_iwasawa(S12, rng), random_iwasawa(S12, rng)
    cache = GramCache()
    gram_matrix([p1, p2], nu, [1], Window(), 1000, 0, cache)
    hit = gram(p2, p1, nu, [1], Window(), 1000, 0, cache)
    direct = gram_matrix([p1, p2], nu, [1], Window(), 1000, 0)
    assert hit.value == pytest.approx(np.conj(direct.matrix[0, 1]))


def test_gram_p2(rng):
    nu = power_law_measure(2)
    ps = [random_iwasawa(S23, rng, 0.5) for _ in range(3)]
    g = gram_matrix(ps, nu, [1, -1], Window(), 5000, 1)
    assert g.min_eigenvalue > 3 * g.min_eigenvalue_se
    assert g.to_dict()["n_samples"] == 5000
