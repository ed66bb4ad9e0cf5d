"""Ensemble states (u, lambda): density, masses, energies, Gram control.

An ensemble is a finite family of orthonormal spectral fields u_1..u_J with
nonnegative occupations lambda_j; it represents the spectral decomposition of
a one-particle density operator directly as (fields, occupations).  The
particle density is rho(x) = sum_j lambda_j |u_j(x)|^2.

Products of degree 2(alpha+1) in u enter the energies, so densities are
evaluated on a zero-padded grid: padding 2 for alpha=1 and 3 for alpha=2
makes every integral used here an exact Galerkin quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Convention, FrequencyLattice, TorusGeometry
from .spectral import SpectralField, lp_project, sobolev_norm, to_grid


def default_padding(alpha: int) -> int:
    """Smallest integer padding making degree-2(alpha+1) products alias-free."""
    return alpha + 1


@dataclass
class DensityField:
    """Nonnegative particle density on a collocation grid (volume-1 torus)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or len(set(v.shape)) != 1:
            raise ValueError("density values must form a cube")
        self.values = v

    @property
    def grid_size(self) -> int:
        return self.values.shape[0]

    def integral(self) -> float:
        """integral rho dx = grid mean (equals the generating state's mass)."""
        return float(np.mean(self.values))

    def power_integral(self, q: float) -> float:
        """integral rho^q dx."""
        return float(np.mean(self.values ** q))

    def lp_norm(self, q: float) -> float:
        return float(np.mean(np.abs(self.values) ** q) ** (1.0 / q))


@dataclass
class EnsembleState:
    """Finite orthonormal family with occupations; values are never mutated."""

    fields: tuple[SpectralField, ...]
    occupations: np.ndarray
    geometry: TorusGeometry
    convention: Convention

    def __post_init__(self):
        self.fields = tuple(self.fields)
        lam = np.asarray(self.occupations, dtype=float)
        if lam.ndim != 1 or lam.size != len(self.fields):
            raise ValueError("occupations must be one per field")
        if lam.size and lam.min() < 0.0:
            raise ValueError("occupations must be nonnegative")
        if not np.all(np.isfinite(lam)):
            raise ValueError("occupations must be finite")
        for f in self.fields[1:]:
            if f.lattice != self.fields[0].lattice:
                raise ValueError("all fields must share one lattice")
        self.occupations = lam

    @property
    def size(self) -> int:
        return len(self.fields)

    @property
    def lattice(self) -> FrequencyLattice:
        if not self.fields:
            raise ValueError("empty ensemble has no lattice")
        return self.fields[0].lattice

    def coeff_matrix(self) -> np.ndarray:
        """Stacked coefficients, shape (J, D), lexicographic flattening."""
        return np.stack([f.coeffs.ravel() for f in self.fields])

    def copy(self) -> "EnsembleState":
        return EnsembleState(tuple(f.copy() for f in self.fields),
                             self.occupations.copy(), self.geometry, self.convention)


def state_from_matrix(coeffs: np.ndarray, occupations, lattice: FrequencyLattice,
                      geometry: TorusGeometry, convention: Convention) -> EnsembleState:
    """Build a state from a (J, D) coefficient matrix."""
    fields = tuple(SpectralField(lattice, row.reshape(lattice.shape))
                   for row in np.asarray(coeffs, dtype=complex))
    return EnsembleState(fields, occupations, geometry, convention)


def random_orthonormal_state(lattice: FrequencyLattice, occupations,
                             geometry: TorusGeometry, convention: Convention,
                             rng: np.random.Generator,
                             envelope: np.ndarray | None = None) -> EnsembleState:
    """Random orthonormal family via QR of Gaussian coefficients."""
    lam = np.asarray(occupations, dtype=float)
    j = lam.size
    d = lattice.count
    if j > d:
        raise ValueError("more fields than lattice dimensions")
    a = rng.standard_normal((d, j)) + 1j * rng.standard_normal((d, j))
    if envelope is not None:
        a *= envelope.reshape(d, 1)
    q, _ = np.linalg.qr(a)
    return state_from_matrix(q.T, lam, lattice, geometry, convention)


def density(state: EnsembleState, padding_ratio: int = 2) -> DensityField:
    """rho = sum_j lambda_j |u_j|^2 on a grid of linear size ratio*(2N+1)."""
    if padding_ratio < 1:
        raise ValueError("padding_ratio must be >= 1")
    m = padding_ratio * state.lattice.linear_size
    rho = np.zeros((m, m, m))
    for lam, f in zip(state.occupations, state.fields):
        if lam == 0.0:
            continue
        g = to_grid(f, m)
        rho += lam * (g.real ** 2 + g.imag ** 2)
    return DensityField(rho)


def mass(state: EnsembleState) -> float:
    """M_lambda(u) = sum_j lambda_j ||u_j||_2^2."""
    return float(sum(lam * f.l2_norm() ** 2
                     for lam, f in zip(state.occupations, state.fields)))


def kinetic_energy(state: EnsembleState) -> float:
    """(1/2) sum_j lambda_j <u_j, -Delta u_j> under the state's convention."""
    if not state.fields:
        return 0.0
    sym = state.lattice.symbol_values(state.geometry, state.convention)
    return 0.5 * float(sum(lam * np.sum(sym * np.abs(f.coeffs) ** 2)
                           for lam, f in zip(state.occupations, state.fields)))


def energy(state: EnsembleState, alpha: int, coupling_sign: int,
           padding_ratio: int | None = None) -> float:
    """Conserved energy: kinetic + sign/(2(alpha+1)) integral rho^(alpha+1)."""
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1 (cubic) or 2 (quintic)")
    if coupling_sign not in (1, -1):
        raise ValueError("coupling_sign must be +1 (defocusing) or -1 (focusing)")
    if not state.fields:
        return 0.0
    if padding_ratio is None:
        padding_ratio = default_padding(alpha)
    rho = density(state, padding_ratio)
    potential = rho.power_integral(alpha + 1) / (2.0 * (alpha + 1))
    return kinetic_energy(state) + coupling_sign * potential


def hs_lambda_norm(state: EnsembleState, s: float) -> float:
    """Occupation-weighted Sobolev norm (sum_j lambda_j ||u_j||_{H^s}^2)^(1/2)."""
    return float(np.sqrt(sum(lam * sobolev_norm(f, s) ** 2
                             for lam, f in zip(state.occupations, state.fields))))


def gram_matrix(state: EnsembleState) -> np.ndarray:
    """G[j,k] = <u_j, u_k> via coefficient inner products."""
    if not state.fields:
        return np.zeros((0, 0), dtype=complex)
    c = state.coeff_matrix()
    return np.conj(c) @ c.T


def gram_deviation(state: EnsembleState) -> float:
    """max |Gram - I| entry; the orthonormality defect."""
    g = gram_matrix(state)
    if g.size == 0:
        return 0.0
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


def lowdin_orthonormalize(coeffs: np.ndarray, min_eig: float = 1e-12) -> np.ndarray:
    """Symmetric orthonormalization of the rows of a (J, D) matrix.

    Perturbs all rows evenly (no order bias).  Raises if the Gram matrix is
    numerically singular (perturbation too large).
    """
    f = coeffs.T  # columns are fields
    g = f.conj().T @ f
    w, v = np.linalg.eigh(g)
    if w.min() < min_eig:
        raise ValueError(
            f"Gram matrix nearly singular (min eigenvalue {w.min():.3e}); "
            "perturbation amplitude too large")
    inv_sqrt = (v * (w ** -0.5)) @ v.conj().T
    return (f @ inv_sqrt).T


def perturb(state: EnsembleState, amplitude: float, band: int,
            seed: int) -> EnsembleState:
    """Add band-limited random noise to every field, then restore
    orthonormality by symmetric (Loewdin) orthonormalization.

    Occupations are unchanged.  amplitude=0 returns the state unchanged
    bit-for-bit; identical seeds give identical output.
    """
    if amplitude < 0.0:
        raise ValueError("amplitude must be nonnegative")
    if amplitude == 0.0:
        return state.copy()
    rng = np.random.default_rng(seed)
    lattice = state.lattice
    noisy = []
    for f in state.fields:
        noise = rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape)
        noise = lp_project(SpectralField(lattice, noise), band, "leq").coeffs
        noisy.append((f.coeffs + amplitude * noise).ravel())
    restored = lowdin_orthonormalize(np.stack(noisy))
    return state_from_matrix(restored, state.occupations.copy(),
                             lattice, state.geometry, state.convention)
