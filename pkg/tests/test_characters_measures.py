import math

import numpy as np
import pytest
from hypothesis import given
from scipy.special import exp1

from conftest import seeds, sigs
from upq_currents.characters import all_plus, char_eval, diag_probe, orbit_separation, sign_vector, sign_vectors
from upq_currents.errors import InvalidInput, NotSkewHermitian
from upq_currents.group import Signature
from upq_currents.iwasawa import random_heisenberg, random_s
from upq_currents.measures import (
    Estimate,
    Window,
    _sphere_orthant_area,
    child_seeds,
    custom_measure,
    gaussian_weight,
    haar_reweight,
    integrate,
    power_law_measure,
    power_law_rn_bound,
    radon_nikodym,
    right_haar_exponents,
    right_haar_measure,
    s_norm2,
)

# frozen after solving the invariance fit; integers once the fit is exact
RIGHT_HAAR_EXPONENTS = {1: (1.0,), 2: (3.0, 1.0), 3: (5.0, 3.0, 1.0)}


# --- characters -----------------------------------------------------------------

def test_character_examples():
    assert char_eval([1], [[1.0]], [[0.0]]) == 1
    theta = 0.7
    assert char_eval([1], [[1.0]], [[1j * theta]]) == pytest.approx(np.exp(1j * theta), abs=1e-15)
    assert char_eval([-1], [[1.0]], [[1j * theta]]) == pytest.approx(np.exp(-1j * theta), abs=1e-15)


@given(seeds, sigs)
def test_character_is_unitary_and_additive(seed, sig):
    rng = np.random.default_rng(seed)
    eps = rng.choice([-1, 1], size=sig.p)
    s = random_s(sig, rng)
    n1, n2 = random_heisenberg(sig, rng, 2.0).n, random_heisenberg(sig, rng, 2.0).n
    c1, c2 = char_eval(eps, s, n1), char_eval(eps, s, n2)
    assert abs(abs(c1) - 1) <= 1e-12
    assert abs(char_eval(eps, s, n1 + n2) - c1 * c2) <= 1e-12


def test_orbit_separation_examples():
    assert orbit_separation([1], [-1], [(np.eye(1), np.array([[1j]]))])
    assert orbit_separation([1, 1], [1, -1], [(np.eye(2), diag_probe([1.0, 1.0]))])
    with pytest.raises(InvalidInput):
        orbit_separation([1, -1], [1, -1], [])


@pytest.mark.parametrize("p", [1, 2, 3])
def test_sign_vectors(p):
    vecs = sign_vectors(p)
    assert len(vecs) == 2**p
    assert len({tuple(v) for v in vecs}) == 2**p
    assert np.array_equal(all_plus(p), np.ones(p))


def test_sign_vector_validation():
    with pytest.raises(InvalidInput):
        sign_vector([1, 0])
    with pytest.raises(InvalidInput):
        sign_vector([1], 2)
    with pytest.raises(NotSkewHermitian):
        char_eval([1], [[1.0]], [[1.0]])


# --- measures -------------------------------------------------------------------

def test_window_validation():
    with pytest.raises(InvalidInput):
        Window(1.0, 0.5)
    with pytest.raises(InvalidInput):
        Window(0.0, 1.0)
    assert Window().scaled(R=20.0) == Window(1e-3, 20.0)


def test_power_law_density_p1():
    nu = power_law_measure(1)
    s = np.array([[[0.5]], [[2.0]]], dtype=complex)
    assert np.allclose(nu.density(s), [2.0, 0.5])


@given(seeds, sigs)
def test_power_law_homogeneity(seed, sig):
    rng = np.random.default_rng(seed)
    nu = power_law_measure(sig.p)
    s = random_s(sig, rng)[None]
    lam = float(np.exp(rng.standard_normal()))
    assert nu.density(lam * s)[0] == pytest.approx(lam ** (-sig.p**2) * nu.density(s)[0], rel=1e-12)


def test_orthant_areas():
    assert _sphere_orthant_area(1) == pytest.approx(1.0)
    assert _sphere_orthant_area(2) == pytest.approx(math.pi**2 / 2)


def test_shell_integral_matches_closed_form():
    exact = 0.5 * (exp1(1.0) - exp1(4.0))
    nu = power_law_measure(1)
    fn = lambda s: np.exp(-s_norm2(s))  # noqa: E731
    for seed in range(3):
        est = integrate(nu, fn, Window(1.0, 2.0), 20000, seed)
        assert abs(est.value - exact) <= 3 * est.std_error


def test_integrate_is_deterministic():
    nu = power_law_measure(2)
    a = integrate(nu, gaussian_weight, Window(0.1, 3.0), 1000, 5)
    b = integrate(nu, gaussian_weight, Window(0.1, 3.0), 1000, 5)
    assert a == b
    assert a.to_dict()["n_samples"] == 1000


def test_estimate_to_dict_complex():
    d = Estimate(1 + 2j, 0.1, 10, 3).to_dict()
    assert d["value"] == [1.0, 2.0]


@given(seeds, sigs)
def test_radon_nikodym_identity_and_cocycle(seed, sig):
    rng = np.random.default_rng(seed)
    nu = power_law_measure(sig.p)
    s, a, b = random_s(sig, rng)[None], random_s(sig, rng), random_s(sig, rng)
    assert radon_nikodym(nu, s, np.eye(sig.p))[0] == pytest.approx(1.0, rel=1e-12)
    lhs = radon_nikodym(nu, s, a @ b)[0]
    rhs = radon_nikodym(nu, s, a)[0] * radon_nikodym(nu, s @ a, b)[0]
    assert lhs == pytest.approx(rhs, rel=1e-10)


@given(seeds)
def test_radon_nikodym_p1_is_one(seed):
    rng = np.random.default_rng(seed)
    nu = power_law_measure(1)
    s, s0 = np.exp(rng.standard_normal((1, 1, 1))), np.exp(rng.standard_normal((1, 1)))
    assert radon_nikodym(nu, s, s0)[0] == pytest.approx(1.0, rel=1e-12)


def test_radon_nikodym_bounded_p2(rng):
    sig = Signature(2, 2)
    nu = power_law_measure(2)
    pts = nu.sample_window(rng, 10000, Window(1e-3, 1e3))
    for _ in range(20):
        s0 = random_s(sig, rng)
        sup = float(np.max(radon_nikodym(nu, pts, s0)))
        assert math.isfinite(sup) and sup <= power_law_rn_bound(s0) * (1 + 1e-12)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_right_haar_exponents_frozen(p):
    assert right_haar_exponents(p) == RIGHT_HAAR_EXPONENTS[p]


@given(seeds, sigs)
def test_right_haar_invariance(seed, sig):
    rng = np.random.default_rng(seed)
    mu = right_haar_measure(sig.p)
    s, s0 = random_s(sig, rng)[None], random_s(sig, rng)
    assert radon_nikodym(mu, s, s0)[0] == pytest.approx(1.0, rel=1e-10)


def test_haar_reweight_trivial_cases(rng):
    mu = right_haar_measure(2)
    a = haar_reweight(mu)
    pts = power_law_measure(2).sample_window(rng, 50, Window(0.1, 5.0))
    assert np.allclose(a(pts), 1.0)
    a1 = haar_reweight(power_law_measure(1))
    pts1 = power_law_measure(1).sample_window(rng, 50, Window(0.1, 5.0))
    assert np.allclose(a1(pts1), a1(pts1)[0])


def test_haar_reweight_density(rng):
    nu = power_law_measure(2)
    a = haar_reweight(nu)
    pts = nu.sample_window(rng, 200, Window(0.1, 5.0))
    assert np.allclose(a(pts) ** 2 * nu.density(pts), right_haar_measure(2).density(pts), rtol=1e-12)


def test_haar_change_of_measure_p2():
    # int |f(s s0)|^2 dnu = int |f(s s0) / a(s)|^2 dmu, with |a|^2 = dmu/dnu
    sig = Signature(2, 2)
    s0 = random_s(sig, np.random.default_rng(3), 0.3)
    nu, mu = power_law_measure(2), right_haar_measure(2)
    a = haar_reweight(nu)

    def fs(s):
        d = np.diagonal(s, axis1=-2, axis2=-1).real
        return gaussian_weight(s @ s0) ** 2 * (d.min(axis=1) >= 0.2)

    w = Window(0.1, 5.0)
    lhs = integrate(nu, fs, w, 20000, 1)
    rhs = integrate(mu, lambda s: fs(s) / a(s) ** 2, w, 20000, 2)
    assert abs(lhs.value - rhs.value) <= 3 * math.hypot(lhs.std_error, rhs.std_error)


def test_custom_measure_and_window_mass():
    m = custom_measure(1, lambda s: np.zeros(s.shape[0]))
    with pytest.raises(InvalidInput):
        m.window_mass(Window())
    with pytest.raises(InvalidInput):
        m.sample_window(np.random.default_rng(0), 3, Window())
    assert power_law_measure(1).window_mass(Window(1.0, math.e)) == pytest.approx(1.0)


def test_child_seeds():
    assert child_seeds(7, 3) == child_seeds(7, 3)
    assert len(set(child_seeds(7, 5))) == 5
