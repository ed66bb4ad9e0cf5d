import pytest

import nlss
from nlss.config import ConfigError, RunConfig, config_from_dict


def _write(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return path


def test_minimal_file_fills_documented_defaults(tmp_path):
    path = _write(tmp_path, """
n = 6
lambda = 1.0
alpha = 1

[casimir]
family = "boltzmann"
beta = 1.0
""")
    config = nlss.parse_config(path)
    assert config.n == 6 and config.lam_total == 1.0 and config.alpha == 1
    assert config.theta == (1.0, 1.0, 1.0)
    assert config.convention == "standard"
    assert config.scf.eta == 0.5 and config.scf.tol_v == 1e-9
    assert config.evolution.dt == 1e-3
    assert config.perturbation.amplitude == 1e-3
    assert config.stability.horizon == 1.0 and config.stability.samples == 100
    assert config.certify.p == 4.0


def test_alpha_out_of_range(tmp_path):
    path = _write(tmp_path, "alpha = 3\n")
    with pytest.raises(ConfigError):
        nlss.parse_config(path)


def test_theta_out_of_range(tmp_path):
    path = _write(tmp_path, "theta = [0.0, 1.0, 1.0]\n")
    with pytest.raises(ConfigError):
        nlss.parse_config(path)


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown top-level"):
        nlss.parse_config(_write(tmp_path, "zzz = 1\n"))
    with pytest.raises(ConfigError, match=r"unknown keys in \[scf\]"):
        nlss.parse_config(_write(tmp_path, "[scf]\nmixing = 0.5\n"))


def test_malformed_toml_rejected(tmp_path):
    with pytest.raises(ConfigError):
        nlss.parse_config(_write(tmp_path, "n = [1,\n"))


def test_range_validation_of_tables():
    with pytest.raises(ConfigError):
        config_from_dict({"scf": {"eta": 0.0}})
    with pytest.raises(ConfigError):
        config_from_dict({"evolution": {"coupling_sign": 2}})
    with pytest.raises(ConfigError):
        config_from_dict({"lambda": -1.0})
    with pytest.raises(ConfigError):
        config_from_dict({"certify": {"p": 3.0}})


def test_builders_produce_consistent_objects():
    config = RunConfig(n=4, alpha=2, theta=(1.0, 0.5, 0.25), convention="paper")
    assert config.lattice().n == 4
    assert config.geometry().theta == (1.0, 0.5, 0.25)
    assert config.convention_enum() is nlss.Convention.PAPER
    assert isinstance(config.build_casimir(), nlss.Boltzmann)
    scf = config.scf_config()
    assert scf.alpha == 2 and scf.lam_total == 1.0
    evo = config.evolution_config(steps=7)
    assert evo.steps == 7 and evo.alpha == 2


def test_shifted_power_from_config():
    config = config_from_dict({"casimir": {"family": "shifted_power", "p": 3.0,
                                           "r": 1.5}})
    cf = config.build_casimir()
    assert isinstance(cf, nlss.ShiftedPower)
    assert cf.p == 3.0 and cf.r == 1.5
