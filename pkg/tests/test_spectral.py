import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nlss


def test_constant_grid_gives_zero_mode_only(square):
    lat = nlss.FrequencyLattice(3)
    field = nlss.from_grid(np.full((7, 7, 7), 2.5 + 0j), lat)
    expected = np.zeros(lat.shape, complex)
    expected[3, 3, 3] = 2.5
    assert np.allclose(field.coeffs, expected, atol=1e-14)


def test_pure_mode_sampling_recovers_unit_coefficient():
    lat = nlss.FrequencyLattice(3)
    m = lat.linear_size
    x = np.arange(m) / m
    grid = np.exp(2j * np.pi * x)[:, None, None] * np.ones((m, m, m))
    field = nlss.from_grid(grid, lat)
    expected = np.zeros(lat.shape, complex)
    expected[4, 3, 3] = 1.0  # xi = (1, 0, 0)
    assert np.allclose(field.coeffs, expected, atol=1e-13)


def test_roundtrip_bare_and_padded(rng):
    lat = nlss.FrequencyLattice(4)
    f = nlss.random_field(lat, rng)
    for m in (lat.linear_size, 2 * lat.linear_size, 23):
        back = nlss.from_grid(nlss.to_grid(f, m), lat)
        assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-12


def test_parseval(rng):
    lat = nlss.FrequencyLattice(4)
    f = nlss.random_field(lat, rng, normalize=False)
    g = nlss.to_grid(f, 2 * lat.linear_size)
    assert np.mean(np.abs(g) ** 2) == pytest.approx(f.l2_norm() ** 2, abs=1e-12)


def test_transform_wrapper_and_size_mismatch(rng):
    lat = nlss.FrequencyLattice(4)
    f = nlss.random_field(lat, rng)
    grid = nlss.transform(f, "to_grid", grid_size=11)
    back = nlss.transform(grid, "to_coeffs", lattice=lat)
    assert np.allclose(back.coeffs, f.coeffs, atol=1e-12)
    with pytest.raises(ValueError):
        nlss.to_grid(f, 5)  # smaller than the lattice
    with pytest.raises(ValueError):
        nlss.transform(f, "sideways")


def test_free_propagate_identity_at_zero(square, standard, rng):
    lat = nlss.FrequencyLattice(3)
    f = nlss.random_field(lat, rng)
    out = nlss.free_propagate(f, 0.0, square, standard)
    assert np.array_equal(out.coeffs, f.coeffs)


def test_free_propagate_paper_mode_period(square):
    # symbol 2*pi*Q((1,0,0)) = 2*pi, so t=1 multiplies by exp(-2*pi*i) = 1
    lat = nlss.FrequencyLattice(2)
    f = nlss.unit_mode(lat, (1, 0, 0))
    out = nlss.free_propagate(f, 1.0, square, nlss.Convention.PAPER)
    assert np.allclose(out.coeffs, f.coeffs, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(t=st.floats(-3, 3), s=st.floats(-3, 3))
def test_free_propagate_unitary_group_law(t, s):
    lat = nlss.FrequencyLattice(3)
    geo = nlss.TorusGeometry((1.0, 0.6, 0.35))
    conv = nlss.Convention.STANDARD
    f = nlss.random_field(lat, np.random.default_rng(7))
    two = nlss.free_propagate(nlss.free_propagate(f, t, geo, conv), s, geo, conv)
    one = nlss.free_propagate(f, t + s, geo, conv)
    assert np.max(np.abs(two.coeffs - one.coeffs)) < 1e-12
    assert nlss.free_propagate(f, t, geo, conv).l2_norm() == pytest.approx(
        f.l2_norm(), abs=1e-12)


def test_smooth_cutoff_plateau_support_monotone():
    x = np.linspace(0.0, 3.0, 301)
    phi = nlss.smooth_cutoff(x)
    assert np.all(phi[x <= 1.0] == 1.0)
    assert np.all(phi[x >= 2.0] == 0.0)
    mid = phi[(x > 1.0) & (x < 2.0)]
    assert np.all(np.diff(mid) <= 1e-12)
    assert np.allclose(nlss.smooth_cutoff(-x), phi)


def test_lp_leq_identity_on_supported_field(rng):
    lat = nlss.FrequencyLattice(4)
    f = nlss.random_field(lat, rng)
    out = nlss.lp_project(f, 4, "leq")
    assert np.array_equal(out.coeffs, f.coeffs)  # phi = 1 on [-1, 1]


def test_lp_telescoping(rng):
    lat = nlss.FrequencyLattice(8)
    f = nlss.random_field(lat, rng)
    total = nlss.lp_project(f, 1, "shell").coeffs.copy()
    for m in (2, 4, 8):
        total += nlss.lp_project(f, m, "shell").coeffs
    target = nlss.lp_project(f, 8, "leq").coeffs
    assert np.max(np.abs(total - target)) < 1e-14


def test_lp_nesting_is_exact(rng):
    lat = nlss.FrequencyLattice(8)
    f = nlss.random_field(lat, rng)
    nested = nlss.lp_project(nlss.lp_project(f, 16, "leq"), 8, "leq")
    direct = nlss.lp_project(f, 8, "leq")
    assert np.array_equal(nested.coeffs, direct.coeffs)


def test_lp_cube_projection():
    lat = nlss.FrequencyLattice(3)
    f = nlss.constant_field(lat, 4.0)
    kept = nlss.lp_project(f, 1, "cube", cube=((0, 0, 0), (1, 1, 1)))
    assert kept.coeffs[3, 3, 3] == 4.0
    assert np.sum(np.abs(kept.coeffs)) == pytest.approx(4.0)
    gone = nlss.lp_project(f, 1, "cube", cube=((1, 1, 1), (2, 2, 2)))
    assert np.all(gone.coeffs == 0.0)


def test_lp_requires_dyadic_level(rng):
    lat = nlss.FrequencyLattice(4)
    f = nlss.random_field(lat, rng)
    with pytest.raises(ValueError):
        nlss.lp_project(f, 3, "leq")


def test_sobolev_norm_examples(square):
    lat = nlss.FrequencyLattice(3)
    const = nlss.constant_field(lat)
    for s in (-1.0, 0.0, 0.5, 2.0):
        assert nlss.sobolev_norm(const, s) == pytest.approx(1.0)
    mode = nlss.unit_mode(lat, (1, 0, 0))
    assert nlss.sobolev_norm(mode, 1.0) == pytest.approx(np.sqrt(2.0))


def test_sobolev_zero_order_is_l2(rng):
    lat = nlss.FrequencyLattice(4)
    f = nlss.random_field(lat, rng, normalize=False)
    assert nlss.sobolev_norm(f, 0.0) == pytest.approx(f.l2_norm(), abs=1e-12)


def test_sobolev_monotone_in_order(rng):
    lat = nlss.FrequencyLattice(4)
    f = nlss.random_field(lat, rng)
    values = [nlss.sobolev_norm(f, s) for s in (-1.0, 0.0, 0.5, 1.0, 2.0)]
    assert np.all(np.diff(values) >= -1e-12)
