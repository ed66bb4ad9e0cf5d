import dataclasses

import numpy as np
import pytest

import nlss
from nlss.config import RunConfig


def _fast_config(**kw):
    base = RunConfig(n=3, seed=5)
    base = dataclasses.replace(base, **kw)
    return base.validate()


def test_validation_suite_passes_on_defaults():
    report = nlss.run_validation_suite(_fast_config())
    failed = [f.name for f in report.families if not f.passed]
    assert report.passed, f"failing families: {failed}"
    assert len(report.families) == 19
    d = report.to_dict()
    assert d["passed"] and len(d["families"]) == 19


def test_validation_suite_detects_injected_fault():
    report = nlss.run_validation_suite(_fast_config(), fault="fstar_sign_flip")
    assert not report.passed
    failing = [f.name for f in report.families if not f.passed]
    assert failing == ["fenchel_young"]
    with pytest.raises(ValueError):
        nlss.run_validation_suite(_fast_config(), fault="gremlins")


def test_validation_suite_validates_both_families():
    casimir = dataclasses.replace(RunConfig(n=3).casimir, family="shifted_power",
                                  p=3.0, r=1.0)
    report = nlss.run_validation_suite(_fast_config(casimir=casimir))
    assert report.passed


def test_stability_zero_amplitude_gives_zero_margins():
    pert = dataclasses.replace(RunConfig().perturbation, amplitude=0.0)
    stab = dataclasses.replace(RunConfig().stability, horizon=0.02, samples=4)
    config = _fast_config(perturbation=pert, stability=stab)
    report = nlss.run_stability_experiment(config)
    assert abs(report.rhs) < 1e-10
    assert np.max(report.lhs) < 1e-10
    assert np.max(np.abs(report.margins)) < 1e-9
    assert not report.violated


def test_stability_cubic_small_run_not_violated():
    stab = dataclasses.replace(RunConfig().stability, horizon=0.1, samples=10)
    config = _fast_config(stability=stab)
    report = nlss.run_stability_experiment(config)
    assert not report.violated
    assert report.min_margin >= -report.tolerance
    assert report.rhs > 0.0
    rows = report.to_dict()["rows"]
    assert len(rows) == len(report.times)
    assert all(r["rhs"] == report.rhs for r in rows)


def test_stability_quintic_checks_chain_inequality():
    stab = dataclasses.replace(RunConfig().stability, horizon=0.05, samples=5)
    pert = dataclasses.replace(RunConfig().perturbation, amplitude=1e-2)
    config = _fast_config(alpha=2, stability=stab, perturbation=pert)
    report = nlss.run_stability_experiment(config)
    assert not report.violated
    assert report.quintic_chain_margin_min is not None
    assert report.quintic_chain_margin_min >= -1e-12
    assert "quintic_chain_margin_min" in report.to_dict()["summary"]


def test_stability_requires_defocusing():
    evo = dataclasses.replace(RunConfig().evolution, coupling_sign=-1)
    config = _fast_config(evolution=evo)
    with pytest.raises(ValueError):
        nlss.run_stability_experiment(config)


def test_random_smooth_state_is_orthonormal_and_weighted(square, standard):
    lat = nlss.FrequencyLattice(4)
    st = nlss.random_smooth_state(lat, 4, 2.0, square, standard, seed=3)
    assert nlss.gram_deviation(st) < 1e-12
    assert np.sum(st.occupations) == pytest.approx(2.0)
    assert np.all(np.diff(st.occupations) < 0.0)
