import os

import numpy as np
import pytest

import nlss


def test_constant_mode_ratio_is_one(square, standard):
    lat = nlss.FrequencyLattice(1)
    field = nlss.constant_field(lat)
    assert nlss.linear_ratio(field, 4.0, square, standard) == pytest.approx(1.0, abs=1e-12)


def test_linear_ratio_requires_admissible_p(square, standard, rng):
    field = nlss.random_field(nlss.FrequencyLattice(2), rng)
    with pytest.raises(ValueError):
        nlss.linear_ratio(field, 3.0, square, standard)
    with pytest.raises(ValueError):
        nlss.strichartz_certificate(square, 2, 10.0 / 3.0, 2, "linear", 0, standard)


def test_linear_ratio_scale_invariant(square, standard, rng):
    lat = nlss.FrequencyLattice(2)
    f = nlss.random_field(lat, rng)
    r1 = nlss.linear_ratio(f, 4.0, square, standard, time_nodes=64)
    r2 = nlss.linear_ratio(nlss.SpectralField(lat, 17.3 * f.coeffs), 4.0,
                           square, standard, time_nodes=64)
    assert abs(r1 - r2) < 1e-12


def test_linear_certificate_statistics(square, standard):
    cert = nlss.strichartz_certificate(square, 2, 4.0, 6, "linear", 42,
                                       standard, time_nodes=64)
    assert cert.ratios.shape == (6,)
    assert np.all(np.isfinite(cert.ratios))
    assert cert.max_ratio >= cert.mean_ratio > 0.0
    d = cert.to_dict()
    assert d["mode"] == "linear" and d["p"] == 4.0 and len(d["ratios"]) == 6


def test_bilinear_ratio_bounded_versus_baseline(square, standard):
    base = nlss.strichartz_certificate(square, 1, None, 4, "bilinear", 7,
                                       standard, n2=1, time_nodes=64)
    wide = nlss.strichartz_certificate(square, 1, None, 4, "bilinear", 7,
                                       standard, n2=16, time_nodes=64)
    assert wide.max_ratio <= 10.0 * base.max_ratio


def test_certificate_deterministic_across_threads(square, standard):
    before = os.environ.get("NLSS_THREADS")
    try:
        os.environ["NLSS_THREADS"] = "1"
        a = nlss.strichartz_certificate(square, 2, 4.0, 4, "linear", 3,
                                        standard, time_nodes=32)
        os.environ["NLSS_THREADS"] = "3"
        b = nlss.strichartz_certificate(square, 2, 4.0, 4, "linear", 3,
                                        standard, time_nodes=32)
    finally:
        if before is None:
            os.environ.pop("NLSS_THREADS", None)
        else:
            os.environ["NLSS_THREADS"] = before
    assert np.array_equal(a.ratios, b.ratios)


def test_unknown_mode_rejected(square, standard):
    with pytest.raises(ValueError):
        nlss.strichartz_certificate(square, 2, 4.0, 2, "trilinear", 0, standard)
