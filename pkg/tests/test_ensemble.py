import numpy as np
import pytest

import nlss


def _single_constant(square, standard, lam=1.0):
    lat = nlss.FrequencyLattice(3)
    return nlss.EnsembleState((nlss.constant_field(lat),), [lam], square, standard)


def test_density_constant_member(square, standard):
    state = _single_constant(square, standard, lam=0.7)
    rho = nlss.density(state, 2)
    assert np.allclose(rho.values, 0.7, atol=1e-13)


def test_density_two_pure_modes(square, standard):
    lat = nlss.FrequencyLattice(3)
    state = nlss.EnsembleState(
        (nlss.unit_mode(lat, (1, 0, 0)), nlss.unit_mode(lat, (0, 2, 0))),
        [0.5, 0.5], square, standard)
    rho = nlss.density(state, 2)
    assert np.allclose(rho.values, 1.0, atol=1e-12)


def test_density_integral_equals_mass(square, standard, rng):
    lat = nlss.FrequencyLattice(4)
    state = nlss.random_orthonormal_state(lat, [0.6, 0.3], square, standard, rng)
    rho = nlss.density(state, 2)
    assert rho.integral() == pytest.approx(nlss.mass(state), abs=1e-12)
    assert rho.values.min() >= 0.0


def test_mass_values(square, standard, rng):
    lat = nlss.FrequencyLattice(3)
    state = nlss.random_orthonormal_state(lat, [0.5, 0.25], square, standard, rng)
    assert nlss.mass(state) == pytest.approx(0.75, abs=1e-12)
    empty = nlss.EnsembleState((), [], square, standard)
    assert nlss.mass(empty) == 0.0
    assert nlss.energy(empty, 1, +1) == 0.0


def test_energy_constant_examples(square, standard):
    state = _single_constant(square, standard)
    assert nlss.energy(state, 1, +1) == pytest.approx(0.25)
    assert nlss.energy(state, 2, +1) == pytest.approx(1.0 / 6.0)
    assert nlss.energy(state, 1, -1) == pytest.approx(-0.25)


def test_energy_unit_mode(square, standard):
    lat = nlss.FrequencyLattice(3)
    state = nlss.EnsembleState((nlss.unit_mode(lat, (1, 0, 0)),), [1.0],
                               square, standard)
    assert nlss.energy(state, 1, +1) == pytest.approx(2 * np.pi ** 2 + 0.25, abs=1e-10)


def test_energy_potential_term_against_coefficient_space(square, standard, rng):
    # independent route: expand rho in coefficients and use Parseval for
    # the quartic integral, instead of the padded collocation mean
    lat = nlss.FrequencyLattice(3)
    state = nlss.random_orthonormal_state(lat, [0.7, 0.4], square, standard, rng)
    rho = nlss.density(state, 2)
    rho_lattice = nlss.FrequencyLattice(2 * lat.n)
    rho_hat = nlss.from_grid(rho.values.astype(complex), rho_lattice)
    quartic_coeff = float(np.sum(np.abs(rho_hat.coeffs) ** 2))
    assert rho.power_integral(2) == pytest.approx(quartic_coeff, abs=1e-12)
    kinetic = 0.5 * sum(
        lam * np.sum(lat.symbol_values(square, standard) * np.abs(f.coeffs) ** 2)
        for lam, f in zip(state.occupations, state.fields))
    expected = kinetic + 0.25 * quartic_coeff
    assert nlss.energy(state, 1, +1) == pytest.approx(expected, abs=1e-12)


def test_energy_validates_arguments(square, standard):
    state = _single_constant(square, standard)
    with pytest.raises(ValueError):
        nlss.energy(state, 3, +1)
    with pytest.raises(ValueError):
        nlss.energy(state, 1, 0)


def test_hs_lambda_norm(square, standard, rng):
    lat = nlss.FrequencyLattice(4)
    state = nlss.random_orthonormal_state(lat, [0.5, 0.25], square, standard, rng)
    assert nlss.hs_lambda_norm(state, 0.0) == pytest.approx(
        np.sqrt(nlss.mass(state)), abs=1e-12)
    values = [nlss.hs_lambda_norm(state, s) for s in (0.0, 0.5, 1.0, 2.0)]
    assert np.all(np.diff(values) >= -1e-12)
    const = _single_constant(square, standard)
    for s in (-1.0, 0.0, 2.0):
        assert nlss.hs_lambda_norm(const, s) == pytest.approx(1.0)


def test_gram_identity_for_constructed_states(square, standard, rng):
    lat = nlss.FrequencyLattice(4)
    state = nlss.random_orthonormal_state(lat, [0.4, 0.3, 0.2], square, standard, rng)
    g = nlss.gram_matrix(state)
    assert np.max(np.abs(g - np.eye(3))) < 1e-14
    single = _single_constant(square, standard)
    assert nlss.gram_matrix(single) == pytest.approx(np.array([[1.0]]))


def test_gram_preserved_by_free_propagation(square, standard, rng):
    lat = nlss.FrequencyLattice(4)
    state = nlss.random_orthonormal_state(lat, [0.5, 0.5], square, standard, rng)
    moved = nlss.EnsembleState(
        tuple(nlss.free_propagate(f, 0.7, square, standard) for f in state.fields),
        state.occupations, square, standard)
    assert nlss.gram_deviation(moved) < 1e-12


def test_h1_apriori_bound_on_random_states(standard, rng):
    lat = nlss.FrequencyLattice(4)
    for _ in range(5):
        geo = nlss.TorusGeometry(tuple(rng.uniform(0.3, 1.0, size=3)))
        state = nlss.random_orthonormal_state(lat, rng.random(2), geo, standard, rng)
        for alpha in (1, 2):
            bound = nlss.mass(state) + 2.0 * nlss.energy(state, alpha, +1)
            assert nlss.hs_lambda_norm(state, 1.0) ** 2 <= bound + 1e-8


def test_perturb_amplitude_zero_is_identity(square, standard, rng):
    lat = nlss.FrequencyLattice(4)
    state = nlss.random_orthonormal_state(lat, [0.5, 0.5], square, standard, rng)
    out = nlss.perturb(state, 0.0, 2, seed=3)
    assert all(np.array_equal(a.coeffs, b.coeffs)
               for a, b in zip(state.fields, out.fields))


def test_perturb_restores_orthonormality(square, standard, rng):
    lat = nlss.FrequencyLattice(4)
    state = nlss.random_orthonormal_state(lat, [0.5, 0.3], square, standard, rng)
    out = nlss.perturb(state, 1e-3, 2, seed=9)
    assert nlss.gram_deviation(out) < 1e-12
    assert np.array_equal(out.occupations, state.occupations)
    changed = max(np.max(np.abs(a.coeffs - b.coeffs))
                  for a, b in zip(state.fields, out.fields))
    assert changed > 1e-5


def test_perturb_is_deterministic(square, standard, rng):
    lat = nlss.FrequencyLattice(4)
    state = nlss.random_orthonormal_state(lat, [0.5, 0.3], square, standard, rng)
    a = nlss.perturb(state, 1e-3, 2, seed=11)
    b = nlss.perturb(state, 1e-3, 2, seed=11)
    assert all(np.array_equal(x.coeffs, y.coeffs)
               for x, y in zip(a.fields, b.fields))


def test_lowdin_rejects_degenerate_gram(rng):
    # two nearly parallel rows make the Gram matrix numerically singular
    from nlss.ensemble import lowdin_orthonormalize

    row = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    rows = np.stack([row, row * (1.0 + 1e-14)])
    with pytest.raises(ValueError):
        lowdin_orthonormalize(rows)


def test_state_invariants_enforced(square, standard, rng):
    lat = nlss.FrequencyLattice(2)
    f = nlss.constant_field(lat)
    with pytest.raises(ValueError):
        nlss.EnsembleState((f,), [-0.1], square, standard)
    with pytest.raises(ValueError):
        nlss.EnsembleState((f,), [0.1, 0.2], square, standard)
    other = nlss.constant_field(nlss.FrequencyLattice(3))
    with pytest.raises(ValueError):
        nlss.EnsembleState((f, other), [0.1, 0.2], square, standard)
