import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

import nlss


def golden_section_max(fn, lo, hi, tol=1e-13):
    """Independent 1-D maximization oracle (golden-section search)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def test_f_eval_values():
    assert nlss.Boltzmann(1.0).f(0.0) == pytest.approx(1.0)
    assert nlss.Boltzmann(2.0).f(1.0) == pytest.approx(math.exp(-2.0))
    assert nlss.ShiftedPower(3.0, 1.0).f(-1.0) == pytest.approx(2.0)


def test_big_f_values():
    assert nlss.Boltzmann(1.0).big_f(0.0) == pytest.approx(1.0)
    assert nlss.Boltzmann(2.0).big_f(0.0) == pytest.approx(0.5)
    assert nlss.ShiftedPower(3.0, 1.0).big_f(0.0) == pytest.approx(0.5)


def test_big_f_matches_quadrature_oracle():
    sp = nlss.ShiftedPower(3.0, 1.0)
    for s in (-2.0, 0.0, 1.5, 10.0):
        oracle, _ = quad(sp.f, s, np.inf, epsabs=1e-12, epsrel=1e-12)
        assert sp.big_f(s) == pytest.approx(oracle, abs=1e-10)


def test_f_star_against_golden_section_oracle(boltzmann):
    for y in (-1.0, -math.e, -0.25):
        _, oracle = golden_section_max(
            lambda s: y * s - boltzmann.big_f(s), -60.0, 60.0)
        assert boltzmann.f_star(y) == pytest.approx(oracle, abs=1e-9)
    assert boltzmann.f_star(-1.0) == pytest.approx(-1.0, abs=1e-9)
    assert boltzmann.f_star(-math.e) == pytest.approx(0.0, abs=1e-9)


def test_f_star_shifted_power_against_oracle():
    sp = nlss.ShiftedPower(3.5, 2.0)
    for y in (-0.5, -1.0, -4.0):
        _, oracle = golden_section_max(lambda s: y * s - sp.big_f(s), -40.0, 40.0)
        assert sp.f_star(y) == pytest.approx(oracle, abs=1e-9)


def test_f_star_domain_boundary(boltzmann):
    assert boltzmann.f_star(0.0) == 0.0
    assert nlss.ShiftedPower(3.0, 1.0).f_star(0.0) == 0.0
    assert boltzmann.f_star(0.5) == math.inf


def test_f_star_prime_values(boltzmann):
    assert boltzmann.f_star_prime(-1.0) == pytest.approx(0.0, abs=1e-12)
    assert boltzmann.f_star_prime(-math.e) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ValueError):
        boltzmann.f_star_prime(0.0)
    with pytest.raises(ValueError):
        boltzmann.f_star_prime(1.0)


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(1e-8, 1e3))
def test_f_star_prime_inverts_minus_f(lam):
    for cf in (nlss.Boltzmann(1.3), nlss.ShiftedPower(3.0, 1.5)):
        s = cf.f_star_prime(-lam)
        assert float(cf.f(s)) == pytest.approx(lam, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(s=st.floats(-20.0, 20.0))
def test_fenchel_young_equality_at_matched_slope(s):
    for cf in (nlss.Boltzmann(1.0), nlss.ShiftedPower(3.0, 1.0)):
        lam = float(cf.f(s))
        gap = float(cf.big_f(s)) + float(cf.f_star(-lam)) + lam * s
        assert abs(gap) < 1e-9 * max(1.0, lam, abs(s))


@settings(max_examples=60, deadline=None)
@given(s=st.floats(-10.0, 10.0), lam=st.floats(1e-6, 50.0))
def test_fenchel_young_inequality(s, lam):
    cf = nlss.Boltzmann(1.0)
    assert float(cf.big_f(s)) + float(cf.f_star(-lam)) >= -lam * s - 1e-9


def test_big_f_convex_and_decreasing(boltzmann):
    s = np.linspace(-5.0, 10.0, 301)
    for cf in (boltzmann, nlss.ShiftedPower(3.0, 1.0)):
        v = np.asarray(cf.big_f(s), float)
        h = s[1] - s[0]
        assert np.all((v[2:] - 2 * v[1:-1] + v[:-2]) / h ** 2 >= -1e-9)
        assert np.all(np.diff(v) <= 1e-12)


def test_affine_lower_bound_from_tangency(boltzmann):
    # for slopes beta in {2, 4}: F(s) >= -beta*s + C with C from the tangent point
    s = np.linspace(-80.0, 0.0, 400)
    for cf in (boltzmann, nlss.ShiftedPower(3.0, 1.0)):
        for beta in (2.0, 4.0):
            s_t = cf.f_inverse(beta)
            c = float(cf.big_f(s_t)) + beta * s_t
            vals = np.asarray(cf.big_f(s), float)
            assert np.all(vals >= -beta * s + c - 1e-9)


def test_generic_fallbacks_match_closed_forms():
    class PlainBoltzmann(nlss.CasimirFunction):
        def f(self, s):
            return np.exp(-1.5 * np.asarray(s, dtype=float))

    plain, closed = PlainBoltzmann(), nlss.Boltzmann(1.5)
    for s in (-2.0, 0.0, 3.0):
        assert plain.big_f(s) == pytest.approx(closed.big_f(s), abs=1e-10)
    for lam in (0.2, 1.0, 40.0):
        assert plain.f_inverse(lam) == pytest.approx(closed.f_inverse(lam), abs=1e-10)
    assert plain.f_star(-1.0) == pytest.approx(closed.f_star(-1.0), abs=1e-9)


def test_validate_boltzmann_passes(boltzmann):
    assert boltzmann.validate().passed
    assert nlss.Boltzmann(2.0).validate().passed


def test_validate_rejects_constant_function():
    report = nlss.validate_casimir(lambda s: 1.0, 1.0, 0.5)
    assert not report.passed
    assert "strict_decrease" in report.failures


def test_validate_rejects_slow_power_decay():
    report = nlss.ShiftedPower(2.0, 1.0).validate()
    assert not report.passed
    assert report.failures == ["polynomial_decay"]


def test_shifted_power_constructor_guards():
    with pytest.raises(ValueError):
        nlss.ShiftedPower(1.0, 1.0)
    with pytest.raises(ValueError):
        nlss.ShiftedPower(3.0, 0.0)
    with pytest.raises(ValueError):
        nlss.Boltzmann(0.0)


def test_make_casimir_factory():
    assert isinstance(nlss.make_casimir("boltzmann", beta=2.0), nlss.Boltzmann)
    sp = nlss.make_casimir("shifted_power", p=3.0, r=1.0)
    assert isinstance(sp, nlss.ShiftedPower)
    with pytest.raises(ValueError):
        nlss.make_casimir("gibbsish")
