"""Self-consistent computation of the stationary state maximizing Phi(V, sigma).

The stationarity conditions

    (-Delta + V) u_k = mu_k u_k,   lambda_k = f(mu_k + sigma),
    sum_k lambda_k = Lambda,       V = rho^alpha,  rho = sum_k lambda_k |u_k|^2

are exactly a fixed point of the loop: eigensolve -Delta + V, solve the
chemical shift sigma by monotone bisection, occupy levels through f, rebuild
rho and mix V toward rho^alpha.  The dual functional Phi(V, sigma) serves as
the merit function: an accepted iterate must not decrease Phi by more than
1e-12, otherwise the mixing step is backtracked.

Occupations below lambda_tol are dropped; the discarded spectrum enters the
sigma constraint and the Phi trace through a tail model built on the free
spectrum (shifted by mean V, exact for constant potentials) and the Li-Yau
minorant beyond the Galerkin dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .casimir import CasimirFunction
from .ensemble import DensityField, EnsembleState, default_padding
from .functionals import (PotentialField, casimir_tail_sum, dual_phi_from_trace,
                          energy_casimir, li_yau_constant)
from .geometry import Convention, FrequencyLattice, TorusGeometry
from .operators import (EigenSolution, apply_hamiltonian, eigensolve_auto,
                        eigensolve_dense, eigensolve_iterative,
                        hamiltonian_matrix)
from .spectral import SpectralField, to_grid


class ScfError(RuntimeError):
    pass


@dataclass
class HamiltonianRep:
    """Dense Galerkin representation of -Delta + V (kept with its inputs)."""

    matrix: np.ndarray
    potential_values: np.ndarray
    lattice: FrequencyLattice
    geometry: TorusGeometry
    convention: Convention

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def build_hamiltonian(v: PotentialField, lattice: FrequencyLattice,
                      geometry: TorusGeometry, convention: Convention) -> HamiltonianRep:
    """Assemble the dense plane-wave matrix of -Delta + V."""
    m = hamiltonian_matrix(v.values, lattice, geometry, convention)
    return HamiltonianRep(m, v.values, lattice, geometry, convention)


def eigensolve(h: HamiltonianRep, k_max: int) -> EigenSolution:
    """Lowest k_max eigenpairs of a prebuilt Hamiltonian, dense path."""
    return eigensolve_dense(h.potential_values, h.lattice, h.geometry,
                            h.convention, k_max, h=h.matrix)


# --- chemical shift ------------------------------------------------------------


def solve_sigma(mu: np.ndarray, cf: CasimirFunction, lam_total: float,
                tail=None, tol: float = 1e-13, max_iter: int = 240) -> float:
    """Solve sum_k f(mu_k + sigma) [+ tail(sigma)] = Lambda by bisection.

    The map is strictly decreasing in sigma with limits +inf and 0, so a
    bracket always exists; it is found by exponential expansion.
    """
    if lam_total <= 0.0:
        raise ValueError("Lambda must be positive")
    mu = np.asarray(mu, dtype=float)

    def g(sigma: float) -> float:
        with np.errstate(over="ignore"):
            s = float(np.sum(np.asarray(cf.f(mu + sigma), dtype=float)))
            if tail is not None:
                s += tail(sigma)
        return s - lam_total

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if g(lo) > 0.0:
            break
        lo *= 2.0
    else:
        raise ScfError("failed to bracket sigma from below")
    for _ in range(200):
        if g(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise ScfError("failed to bracket sigma from above")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class TailModel:
    """Galerkin spectrum beyond the solved eigenpairs, modeled on the free one.

    Levels k_start < k <= D use the enumerated free eigenvalues shifted by a
    uniform estimate of V (its mean; exact when V is constant).  The model
    deliberately stops at the Galerkin dimension: the SCF duality identity
    Phi(V0, sigma0) = H_f(u0, lambda0) is exact for the truncated model, and
    folding the continuum (Li-Yau) remainder into sigma or Phi would break it
    for slowly decaying occupation functions.  The continuum bound stays a
    reported diagnostic (see trace_f).
    """

    cf: CasimirFunction
    free_mu: np.ndarray
    li_yau_c: float
    shift: float
    k_start: int

    def occupation_tail(self, sigma: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.sum(np.asarray(
                self.cf.f(self.free_mu[self.k_start:] + self.shift + sigma), dtype=float)))

    def trace_tail(self, sigma: float) -> float:
        return float(np.sum(np.asarray(
            self.cf.big_f(self.free_mu[self.k_start:] + self.shift + sigma), dtype=float)))

    def continuum_occupation_bound(self, sigma: float) -> float:
        return _occupation_tail_sum(self.cf, self.li_yau_c, self.free_mu.size,
                                    self.shift + sigma)


def _occupation_tail_sum(cf: CasimirFunction, c: float, k_start: int,
                         sigma: float, direct_terms: int = 8192) -> float:
    """Upper bound on sum_{k > k_start} f(c k^(2/3) + sigma) (integral test)."""
    from scipy.integrate import quad

    total = 0.0
    k = k_start + 1
    remaining = direct_terms
    while remaining > 0:
        ks = np.arange(k, k + min(512, remaining), dtype=float)
        terms = np.asarray(cf.f(c * ks ** (2.0 / 3.0) + sigma), dtype=float)
        s = float(np.sum(terms))
        total += s
        k += ks.size
        remaining -= ks.size
        if s <= 1e-16 * max(total, 1e-300):
            return total
    rem, _ = quad(lambda t: float(cf.f(c * t ** (2.0 / 3.0) + sigma)),
                  k - 1, np.inf, epsabs=1e-14, epsrel=1e-10, limit=200)
    return total + rem


# --- SCF loop -------------------------------------------------------------------


@dataclass
class ScfConfig:
    lattice: FrequencyLattice
    geometry: TorusGeometry
    convention: Convention
    cf: CasimirFunction
    alpha: int
    lam_total: float
    eta: float = 0.5
    anderson_depth: int = 0
    tol_v: float = 1e-9
    tol_lambda: float = 1e-9
    max_iter: int = 200
    lambda_tol: float = 1e-12
    k_max: int | None = None
    padding_ratio: int | None = None
    eig_method: str = "auto"

    def __post_init__(self):
        if self.alpha not in (1, 2):
            raise ValueError("alpha must be 1 or 2")
        if self.lam_total <= 0.0:
            raise ValueError("Lambda must be positive")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("mixing eta must lie in (0, 1]")
        if min(self.tol_v, self.tol_lambda, self.lambda_tol) <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.anderson_depth < 0:
            raise ValueError("anderson_depth must be >= 0")


@dataclass
class ScfIterate:
    iteration: int
    sigma: float
    phi: float
    residual_v: float
    residual_lambda: float
    occupied: int
    accepted: bool
    eta: float


@dataclass
class StationaryState:
    """Converged stationary state and its dual data."""

    fields: tuple[SpectralField, ...]
    occupations: np.ndarray
    energies: np.ndarray                  # mu_0, ascending, one per retained field
    rho: DensityField
    potential: PotentialField
    sigma: float
    phi: float
    lam_total: float
    alpha: int
    geometry: TorusGeometry
    convention: Convention
    mu_computed: np.ndarray               # all eigenvalues solved at convergence
    iterations: list[ScfIterate] = field(default_factory=list)

    @property
    def lattice(self) -> FrequencyLattice:
        return self.fields[0].lattice

    def ensemble(self) -> EnsembleState:
        return EnsembleState(self.fields, self.occupations.copy(),
                             self.geometry, self.convention)

    def phi_trace(self) -> np.ndarray:
        return np.array([it.phi for it in self.iterations if it.accepted])


def _eigensolve(method: str, v_values, lattice, geometry, convention, k) -> EigenSolution:
    if method == "dense":
        return eigensolve_dense(v_values, lattice, geometry, convention, k)
    if method == "iterative":
        return eigensolve_iterative(v_values, lattice, geometry, convention, k)
    return eigensolve_auto(v_values, lattice, geometry, convention, k)


def _initial_pair_count(config: ScfConfig, free_mu: np.ndarray, shift: float) -> int:
    """Pairs needed so the occupation cutoff falls inside the solved window."""
    sigma0 = solve_sigma(free_mu + shift, config.cf, config.lam_total)
    with np.errstate(over="ignore"):
        occ = np.asarray(config.cf.f(free_mu + shift + sigma0), dtype=float)
    needed = int(np.sum(occ >= 0.1 * config.lambda_tol)) + 8
    cap = config.k_max or free_mu.size
    return max(4, min(needed, cap, free_mu.size))


def scf_solve(config: ScfConfig, initial_v: np.ndarray | None = None) -> StationaryState:
    """Iterate eigensolve / sigma / occupations / density to the fixed point.

    The default start V = Lambda^alpha (constant, matching total density at
    uniform spread) may be overridden with any nonnegative grid of the padded
    size, e.g. to restart from a snapshot or to stress the mixing loop.
    """
    lat, geo, conv = config.lattice, config.geometry, config.convention
    cf, alpha = config.cf, config.alpha
    pad = config.padding_ratio or default_padding(alpha)
    m_pad = pad * lat.linear_size
    d = lat.count
    free_mu = lat.free_spectrum(geo, conv)
    c_liyau = li_yau_constant(free_mu)

    if initial_v is None:
        v_values = np.full((m_pad,) * 3, config.lam_total ** alpha)
    else:
        v_values = np.asarray(initial_v, dtype=float).copy()
        if v_values.shape != (m_pad,) * 3 or v_values.min() < 0.0:
            raise ValueError(f"initial potential must be a nonnegative cube of size {m_pad}")
    k_eig = _initial_pair_count(config, free_mu, float(np.mean(v_values)))
    k_cap = min(config.k_max or d, d)

    eta_step = config.eta
    accepted_v = None
    accepted_target = None
    phi_prev = None
    history: list[tuple[np.ndarray, np.ndarray]] = []
    iterates: list[ScfIterate] = []
    result = None

    for it in range(1, config.max_iter + 1):
        shift = float(np.mean(v_values))
        sol = _eigensolve(config.eig_method, v_values, lat, geo, conv, k_eig)
        tail = TailModel(cf, free_mu, c_liyau, shift, k_eig)
        sigma = solve_sigma(sol.mu, cf, config.lam_total, tail=tail.occupation_tail)
        lam_all = np.asarray(cf.f(sol.mu + sigma), dtype=float)
        # grow the window until the cutoff is strictly inside it
        while lam_all[-1] >= config.lambda_tol and k_eig < k_cap:
            k_eig = min(2 * k_eig, k_cap)
            sol = _eigensolve(config.eig_method, v_values, lat, geo, conv, k_eig)
            tail = TailModel(cf, free_mu, c_liyau, shift, k_eig)
            sigma = solve_sigma(sol.mu, cf, config.lam_total, tail=tail.occupation_tail)
            lam_all = np.asarray(cf.f(sol.mu + sigma), dtype=float)

        j = max(1, int(np.sum(lam_all >= config.lambda_tol)))
        lam = lam_all[:j]
        rho = np.zeros((m_pad,) * 3)
        cubes = sol.vectors[:j].reshape((j,) + lat.shape)
        for weight, cube in zip(lam, cubes):
            g = to_grid(SpectralField(lat, cube), m_pad)
            rho += weight * (g.real ** 2 + g.imag ** 2)
        v_target = rho ** alpha

        res_v = float(np.max(np.abs(v_values - v_target)))
        res_lam = abs(float(np.sum(lam_all)) + tail.occupation_tail(sigma)
                      - config.lam_total)
        trace_value = float(np.sum(np.asarray(cf.big_f(sol.mu + sigma), dtype=float)))
        trace_value += tail.trace_tail(sigma)
        phi = dual_phi_from_trace(trace_value, PotentialField(v_values), sigma,
                                  config.lam_total, alpha)

        if phi_prev is not None and phi < phi_prev - 1e-12:
            # reject: shorten the step from the last accepted iterate
            iterates.append(ScfIterate(it, sigma, phi, res_v, res_lam, j, False, eta_step))
            eta_step *= 0.5
            if eta_step < 1e-8:
                raise ScfError(
                    "dual functional kept decreasing under eta backtracking")
            v_values = accepted_v + eta_step * (accepted_target - accepted_v)
            np.maximum(v_values, 0.0, out=v_values)
            history.clear()
            continue

        iterates.append(ScfIterate(it, sigma, phi, res_v, res_lam, j, True, eta_step))
        phi_prev = phi
        accepted_v = v_values
        accepted_target = v_target
        eta_step = config.eta

        if res_v <= config.tol_v and res_lam <= config.tol_lambda:
            result = (sol, sigma, lam, rho, v_values, phi, j)
            break

        residual = v_target - v_values
        history.append((v_values.ravel().copy(), residual.ravel().copy()))
        if len(history) > config.anderson_depth + 1:
            history.pop(0)
        if config.anderson_depth > 0 and len(history) >= 2:
            v_values = _anderson_step(history, config.eta).reshape(rho.shape)
        else:
            v_values = v_values + config.eta * residual
        np.maximum(v_values, 0.0, out=v_values)

    if result is None:
        raise ScfError(f"no convergence within {config.max_iter} iterations "
                       f"(last residual_v {iterates[-1].residual_v:.3e})")

    sol, sigma, lam, rho, v_values, phi, j = result
    fields = tuple(SpectralField(lat, cube.copy())
                   for cube in sol.vectors[:j].reshape((j,) + lat.shape))
    return StationaryState(
        fields=fields, occupations=lam.copy(), energies=sol.mu[:j].copy(),
        rho=DensityField(rho), potential=PotentialField(v_values),
        sigma=sigma, phi=phi, lam_total=config.lam_total, alpha=alpha,
        geometry=geo, convention=conv, mu_computed=sol.mu.copy(),
        iterations=iterates)


def _anderson_step(history: list[tuple[np.ndarray, np.ndarray]], eta: float) -> np.ndarray:
    """Type-II Anderson mixing over the stored (V, residual) history."""
    vs = [h[0] for h in history]
    rs = [h[1] for h in history]
    dv = np.stack([vs[i + 1] - vs[i] for i in range(len(vs) - 1)], axis=1)
    dr = np.stack([rs[i + 1] - rs[i] for i in range(len(rs) - 1)], axis=1)
    gamma, *_ = np.linalg.lstsq(dr, rs[-1], rcond=None)
    return vs[-1] + eta * rs[-1] - (dv + eta * dr) @ gamma


# --- verification ----------------------------------------------------------------


@dataclass
class StationaryReport:
    eigen_residual_max: float
    v_residual: float
    lambda_sum_residual: float          # |sum lambda_0 - Lambda|, retained only
    lambda_constraint_residual: float   # includes computed window + tail model
    occupation_residuals: np.ndarray    # |lambda_k - f(mu_k + sigma)| per k
    duality_gap: float                  # |Phi_0 - H_f(u_0, lambda_0)|
    phi_trace_monotone: bool

    @property
    def occupation_residual_max(self) -> float:
        return float(np.max(self.occupation_residuals)) if self.occupation_residuals.size else 0.0

    @property
    def occupation_residual_argmax(self) -> int:
        return int(np.argmax(self.occupation_residuals)) if self.occupation_residuals.size else -1

    def to_dict(self) -> dict:
        return {
            "eigen_residual_max": self.eigen_residual_max,
            "v_residual": self.v_residual,
            "lambda_sum_residual": self.lambda_sum_residual,
            "lambda_constraint_residual": self.lambda_constraint_residual,
            "occupation_residual_max": self.occupation_residual_max,
            "occupation_residual_argmax": self.occupation_residual_argmax,
            "duality_gap": self.duality_gap,
            "phi_trace_monotone": self.phi_trace_monotone,
        }


def verify_stationary(st: StationaryState, cf: CasimirFunction,
                      alpha: int | None = None,
                      occupations: np.ndarray | None = None) -> StationaryReport:
    """Recompute every stationarity residual from scratch (report only).

    ``occupations`` overrides the state's own occupations, so injected faults
    show up in the per-entry occupation residuals.
    """
    alpha = st.alpha if alpha is None else alpha
    lam = st.occupations if occupations is None else np.asarray(occupations, float)
    lat = st.lattice
    j = len(st.fields)
    cubes = np.stack([f.coeffs for f in st.fields])
    hv = apply_hamiltonian(cubes, st.potential.values, lat, st.geometry, st.convention)
    res = hv - st.energies[:, None, None, None] * cubes
    eig_res = float(np.max(np.sqrt(np.sum(np.abs(res) ** 2, axis=(1, 2, 3))))) if j else 0.0

    m_pad = st.potential.grid_size
    rho = np.zeros((m_pad,) * 3)
    for weight, f_ in zip(lam, st.fields):
        g = to_grid(f_, m_pad)
        rho += weight * (g.real ** 2 + g.imag ** 2)
    v_res = float(np.max(np.abs(st.potential.values - rho ** alpha)))

    occ_res = np.abs(lam - np.asarray(cf.f(st.energies + st.sigma), dtype=float))
    lam_sum_res = abs(float(np.sum(lam)) - st.lam_total)

    free_mu = lat.free_spectrum(st.geometry, st.convention)
    tail = TailModel(cf, free_mu, li_yau_constant(free_mu),
                     float(np.mean(st.potential.values)), st.mu_computed.size)
    beyond_window = float(np.sum(np.asarray(
        cf.f(st.mu_computed[j:] + st.sigma), dtype=float)))
    constraint_res = abs(float(np.sum(lam)) + beyond_window
                         + tail.occupation_tail(st.sigma) - st.lam_total)

    ens = EnsembleState(st.fields, lam, st.geometry, st.convention)
    gap = abs(st.phi - energy_casimir(ens, cf, alpha))

    phis = st.phi_trace()
    monotone = bool(np.all(np.diff(phis) >= -1e-12)) if phis.size > 1 else True
    return StationaryReport(eig_res, v_res, lam_sum_res, constraint_res,
                            occ_res, gap, monotone)
