import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import nlss


def test_q_form_square(square):
    assert nlss.q_form(square, (1, 2, 3)) == pytest.approx(14.0)


def test_q_form_anisotropic():
    geo = nlss.TorusGeometry((1.0, 0.5, 0.25))
    assert nlss.q_form(geo, (2, 2, 2)) == pytest.approx(7.0)


def test_q_form_zero_frequency(square):
    assert nlss.q_form(square, (0, 0, 0)) == 0.0


@given(st.tuples(st.integers(-30, 30), st.integers(-30, 30), st.integers(-30, 30)))
def test_q_form_positive_definite(xi):
    geo = nlss.TorusGeometry((1.0, 0.7, 0.3))
    q = nlss.q_form(geo, xi)
    assert q == 0.0 if xi == (0, 0, 0) else q > 0.0


def test_laplacian_symbol_both_conventions(square):
    std = nlss.laplacian_symbol(square, (1, 0, 0), nlss.Convention.STANDARD)
    assert std == pytest.approx(4 * np.pi ** 2)
    pap = nlss.laplacian_symbol(square, (1, 0, 0), nlss.Convention.PAPER)
    assert pap == pytest.approx(2 * np.pi)
    for conv in nlss.Convention:
        assert nlss.laplacian_symbol(square, (0, 0, 0), conv) == 0.0


def test_theta_must_lie_in_unit_interval():
    with pytest.raises(ValueError):
        nlss.TorusGeometry((0.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        nlss.TorusGeometry((1.0, 1.5, 1.0))


def test_side_lengths_invert_theta():
    geo = nlss.TorusGeometry((1.0, 0.25, 0.0625))
    assert geo.side_lengths == pytest.approx((1.0, 2.0, 4.0))


def test_lattice_count_and_lexicographic_order():
    lat = nlss.FrequencyLattice(2)
    assert lat.count == 125
    pts = lat.points()
    assert tuple(pts[0]) == (-2, -2, -2)
    assert tuple(pts[-1]) == (2, 2, 2)
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
    assert np.array_equal(order, np.arange(lat.count))


def test_lattice_requires_positive_radius():
    with pytest.raises(ValueError):
        nlss.FrequencyLattice(0)


def test_free_spectrum_matches_enumeration(irrational, standard):
    lat = nlss.FrequencyLattice(3)
    t1, t2, t3 = irrational.theta
    expected = sorted(
        4 * np.pi ** 2 * (t1 * a ** 2 + t2 * b ** 2 + t3 * c ** 2)
        for a in range(-3, 4) for b in range(-3, 4) for c in range(-3, 4))
    assert np.allclose(lat.free_spectrum(irrational, standard), expected, atol=1e-12)


def test_convention_parse_round_trip():
    assert nlss.Convention.parse("paper") is nlss.Convention.PAPER
    assert nlss.Convention.parse(nlss.Convention.STANDARD) is nlss.Convention.STANDARD
    with pytest.raises(ValueError):
        nlss.Convention.parse("bogus")
