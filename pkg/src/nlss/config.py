"""Run configuration: strict TOML parsing, defaults, and object builders.

Unknown keys are errors; every field below shows its default.  The `lambda`
TOML key maps to ``lam_total`` (total occupation Lambda).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .casimir import CasimirFunction, make_casimir
from .geometry import Convention, FrequencyLattice, TorusGeometry


class ConfigError(ValueError):
    pass


@dataclass
class CasimirSettings:
    family: str = "boltzmann"
    beta: float = 1.0
    p: float = 3.0
    r: float = 1.0


@dataclass
class ScfSettings:
    eta: float = 0.5
    anderson_depth: int = 0
    tol_v: float = 1e-9
    tol_lambda: float = 1e-9
    max_iter: int = 200
    lambda_tol: float = 1e-12
    k_max: int = 0          # 0 = choose from the occupation cutoff


@dataclass
class EvolutionSettings:
    dt: float = 1e-3
    steps: int = 1000
    cadence: int = 10
    coupling_sign: int = 1


@dataclass
class PerturbationSettings:
    amplitude: float = 1e-3
    band: int = 2
    seed: int = 1234


@dataclass
class StabilitySettings:
    horizon: float = 1.0
    samples: int = 100


@dataclass
class CertifySettings:
    p: float = 4.0
    n_samples: int = 50
    n_values: tuple = (4, 8, 16)
    bilinear_samples: int = 8
    bilinear_n_values: tuple = (1, 4, 16)


@dataclass
class RunConfig:
    n: int = 6
    lam_total: float = 1.0
    alpha: int = 1
    theta: tuple = (1.0, 1.0, 1.0)
    convention: str = "standard"
    seed: int = 0
    j: int = 2              # ensemble size for randomly initialized evolutions
    casimir: CasimirSettings = field(default_factory=CasimirSettings)
    scf: ScfSettings = field(default_factory=ScfSettings)
    evolution: EvolutionSettings = field(default_factory=EvolutionSettings)
    perturbation: PerturbationSettings = field(default_factory=PerturbationSettings)
    stability: StabilitySettings = field(default_factory=StabilitySettings)
    certify: CertifySettings = field(default_factory=CertifySettings)

    # -- validation ----------------------------------------------------------

    def validate(self) -> "RunConfig":
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.alpha not in (1, 2):
            raise ConfigError(f"alpha must be 1 or 2, got {self.alpha}")
        if self.lam_total <= 0.0:
            raise ConfigError(f"lambda must be positive, got {self.lam_total}")
        if len(self.theta) != 3 or not all(0.0 < t <= 1.0 for t in self.theta):
            raise ConfigError(f"theta components must lie in (0, 1], got {self.theta}")
        if self.convention not in ("standard", "paper"):
            raise ConfigError(f"convention must be 'standard' or 'paper', got {self.convention!r}")
        if self.j < 1:
            raise ConfigError(f"j must be >= 1, got {self.j}")
        if self.casimir.family not in ("boltzmann", "shifted_power"):
            raise ConfigError(f"unknown casimir.family {self.casimir.family!r}")
        if self.casimir.beta <= 0.0:
            raise ConfigError("casimir.beta must be positive")
        s = self.scf
        if not (0.0 < s.eta <= 1.0):
            raise ConfigError("scf.eta must lie in (0, 1]")
        if min(s.tol_v, s.tol_lambda, s.lambda_tol) <= 0.0:
            raise ConfigError("scf tolerances must be positive")
        if s.max_iter < 1 or s.anderson_depth < 0 or s.k_max < 0:
            raise ConfigError("scf.max_iter >= 1, anderson_depth >= 0, k_max >= 0 required")
        e = self.evolution
        if e.dt <= 0.0 or e.steps < 0 or e.cadence < 1:
            raise ConfigError("evolution needs dt > 0, steps >= 0, cadence >= 1")
        if e.coupling_sign not in (1, -1):
            raise ConfigError("evolution.coupling_sign must be 1 or -1")
        pert = self.perturbation
        if pert.amplitude < 0.0 or pert.band < 1:
            raise ConfigError("perturbation needs amplitude >= 0 and band >= 1")
        st = self.stability
        if st.horizon <= 0.0 or st.samples < 1:
            raise ConfigError("stability needs horizon > 0 and samples >= 1")
        c = self.certify
        if c.p <= 10.0 / 3.0:
            raise ConfigError("certify.p must exceed 10/3")
        if c.n_samples < 1 or c.bilinear_samples < 1:
            raise ConfigError("certificate sample counts must be >= 1")
        return self

    # -- builders --------------------------------------------------------------

    def lattice(self) -> FrequencyLattice:
        return FrequencyLattice(self.n)

    def geometry(self) -> TorusGeometry:
        return TorusGeometry(tuple(self.theta))

    def convention_enum(self) -> Convention:
        return Convention.parse(self.convention)

    def build_casimir(self) -> CasimirFunction:
        return make_casimir(self.casimir.family, beta=self.casimir.beta,
                            p=self.casimir.p, r=self.casimir.r)

    def scf_config(self):
        from .stationary import ScfConfig

        return ScfConfig(
            lattice=self.lattice(), geometry=self.geometry(),
            convention=self.convention_enum(), cf=self.build_casimir(),
            alpha=self.alpha, lam_total=self.lam_total, eta=self.scf.eta,
            anderson_depth=self.scf.anderson_depth, tol_v=self.scf.tol_v,
            tol_lambda=self.scf.tol_lambda, max_iter=self.scf.max_iter,
            lambda_tol=self.scf.lambda_tol,
            k_max=self.scf.k_max or None)

    def evolution_config(self, steps: int | None = None, cadence: int | None = None):
        from .dynamics import EvolutionConfig

        return EvolutionConfig(
            dt=self.evolution.dt,
            steps=self.evolution.steps if steps is None else steps,
            alpha=self.alpha, coupling_sign=self.evolution.coupling_sign,
            cadence=self.evolution.cadence if cadence is None else cadence)


_TOP_KEYS = {"n", "lambda", "alpha", "theta", "convention", "seed", "j"}
_TABLES = {
    "casimir": CasimirSettings,
    "scf": ScfSettings,
    "evolution": EvolutionSettings,
    "perturbation": PerturbationSettings,
    "stability": StabilitySettings,
    "certify": CertifySettings,
}


def _coerce(settings_cls, table: dict, table_name: str):
    allowed = {f.name for f in dataclasses.fields(settings_cls)}
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{table_name}]: {sorted(unknown)}")
    kwargs = {}
    for key, value in table.items():
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return settings_cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad [{table_name}] table: {exc}") from None


def config_from_dict(data: dict) -> RunConfig:
    unknown = set(data) - _TOP_KEYS - set(_TABLES)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kwargs = {}
    for key in _TOP_KEYS:
        if key in data:
            value = data[key]
            if isinstance(value, list):
                value = tuple(value)
            kwargs["lam_total" if key == "lambda" else key] = value
    for name, cls in _TABLES.items():
        if name in data:
            if not isinstance(data[name], dict):
                raise ConfigError(f"[{name}] must be a table")
            kwargs[name] = _coerce(cls, data[name], name)
    try:
        config = RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return config.validate()


def parse_config(path) -> RunConfig:
    """Strictly parse a TOML run configuration file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data)
