"""Spectral fields on the truncated lattice: transforms, propagator, projections.

Fields are stored as complex coefficient cubes of shape (2n+1,)^3 indexed by
xi + n.  The collocation convention is

    u(x) = sum_xi uhat(xi) exp(2*pi*i xi.x),    x in [0,1)^3,

with spatial integrals equal to grid means (coordinate volume 1), so Parseval
reads mean_x |u|^2 = sum_xi |uhat|^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .geometry import Convention, FrequencyLattice, TorusGeometry


@dataclass
class SpectralField:
    """One complex field as Fourier coefficients on a FrequencyLattice."""

    lattice: FrequencyLattice
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != self.lattice.shape:
            raise ValueError(
                f"coefficient shape {coeffs.shape} does not match lattice {self.lattice.shape}"
            )
        self.coeffs = coeffs

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def copy(self) -> "SpectralField":
        return SpectralField(self.lattice, self.coeffs.copy())


def constant_field(lattice: FrequencyLattice, value: complex = 1.0) -> SpectralField:
    c = np.zeros(lattice.shape, dtype=complex)
    c[lattice.n, lattice.n, lattice.n] = value
    return SpectralField(lattice, c)


def unit_mode(lattice: FrequencyLattice, xi) -> SpectralField:
    xi = tuple(int(v) for v in xi)
    n = lattice.n
    if any(abs(v) > n for v in xi):
        raise ValueError(f"mode {xi} outside lattice radius {n}")
    c = np.zeros(lattice.shape, dtype=complex)
    c[xi[0] + n, xi[1] + n, xi[2] + n] = 1.0
    return SpectralField(lattice, c)


def random_field(lattice: FrequencyLattice, rng: np.random.Generator,
                 envelope: np.ndarray | None = None, normalize: bool = True) -> SpectralField:
    """Complex Gaussian coefficients, optionally enveloped and L2-normalized."""
    c = rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape)
    if envelope is not None:
        c = c * envelope
    if normalize:
        c = c / np.linalg.norm(c)
    return SpectralField(lattice, c)


@lru_cache(maxsize=64)
def _embed_indices(n: int, grid_size: int) -> np.ndarray:
    """FFT-grid positions of lattice frequencies -n..n on a size-m grid."""
    if grid_size < 2 * n + 1:
        raise ValueError(f"grid size {grid_size} too small for lattice radius {n}")
    idx = np.arange(-n, n + 1) % grid_size
    idx.setflags(write=False)
    return idx


def to_grid(field: SpectralField, grid_size: int | None = None) -> np.ndarray:
    """Evaluate the field on a uniform collocation grid of linear size m.

    m defaults to 2n+1 (the minimal alias-free grid); any m >= 2n+1 performs
    exact zero-padded evaluation.
    """
    n = field.lattice.n
    m = field.lattice.linear_size if grid_size is None else int(grid_size)
    idx = _embed_indices(n, m)
    big = np.zeros((m, m, m), dtype=complex)
    big[np.ix_(idx, idx, idx)] = field.coeffs
    return sfft.ifftn(big, norm="forward")


def from_grid(values: np.ndarray, lattice: FrequencyLattice) -> SpectralField:
    """Project grid values back to lattice coefficients (truncating)."""
    values = np.asarray(values)
    if values.ndim != 3 or len(set(values.shape)) != 1:
        raise ValueError("grid values must form a cube")
    m = values.shape[0]
    idx = _embed_indices(lattice.n, m)
    big = sfft.fftn(values.astype(complex, copy=False), norm="forward")
    return SpectralField(lattice, big[np.ix_(idx, idx, idx)].copy())


def transform(obj, direction: str, *, lattice: FrequencyLattice | None = None,
              grid_size: int | None = None):
    """Change of basis between coefficients and collocation values.

    direction='to_grid' maps a SpectralField to grid values; 'to_coeffs' maps
    grid values to a SpectralField on ``lattice``.  The two directions are an
    exact inverse pair (up to round-off) whenever the grid resolves the
    lattice.
    """
    if direction == "to_grid":
        return to_grid(obj, grid_size)
    if direction == "to_coeffs":
        if lattice is None:
            raise ValueError("'to_coeffs' requires the target lattice")
        return from_grid(obj, lattice)
    raise ValueError(f"unknown direction {direction!r}")


def free_propagate(field: SpectralField, t: float, geometry: TorusGeometry,
                   convention: Convention) -> SpectralField:
    """Apply the free Schroedinger propagator: uhat *= exp(-i t symbol(xi))."""
    phase = np.exp(-1j * t * field.lattice.symbol_values(geometry, convention))
    return SpectralField(field.lattice, field.coeffs * phase)


# --- Littlewood-Paley projections -------------------------------------------
#
# phi is a concrete C^inf bump: phi(x) = 1 on [-1,1], phi(x) = 0 for |x| >= 2,
# with the standard exp(-1/t) transition in between:
#
#     phi(x) = g(2-|x|) / (g(2-|x|) + g(|x|-1)),   g(t) = exp(-1/t) 1_{t>0}.


def smooth_cutoff(x) -> np.ndarray:
    """The bump phi described above, vectorized."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.ones_like(x)
    out[x >= 2.0] = 0.0
    mid = (x > 1.0) & (x < 2.0)
    if np.any(mid):
        xm = x[mid]
        ga = np.exp(-1.0 / (2.0 - xm))
        gb = np.exp(-1.0 / (xm - 1.0))
        out[mid] = ga / (ga + gb)
    return out


def _is_dyadic(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _leq_multiplier(lattice: FrequencyLattice, n_cut: int) -> np.ndarray:
    x1, x2, x3 = lattice.xi_components()
    return (smooth_cutoff(x1 / n_cut) * smooth_cutoff(x2 / n_cut)
            * smooth_cutoff(x3 / n_cut))


def lp_project(field: SpectralField, n_cut: int, kind: str = "leq",
               cube: tuple | None = None) -> SpectralField:
    """Littlewood-Paley projection P_{<=N}, dyadic shell P_N, or sharp cube.

    kind='leq'   multiplies by prod_j phi(xi_j / N).
    kind='shell' multiplies by the dyadic difference P_{<=N} - P_{<=N/2}
                 (P_1 coincides with P_{<=1}); these telescope exactly.
    kind='cube'  multiplies by the indicator of the integer cube
                 ``cube = ((lo1,lo2,lo3), (hi1,hi2,hi3))`` (inclusive).
    """
    if kind in ("leq", "shell"):
        n_cut = int(n_cut)
        if not _is_dyadic(n_cut):
            raise ValueError(f"projection level must be a dyadic integer >= 1, got {n_cut}")
        if kind == "leq" or n_cut == 1:
            mult = _leq_multiplier(field.lattice, n_cut)
        else:
            mult = _leq_multiplier(field.lattice, n_cut) - _leq_multiplier(field.lattice, n_cut // 2)
        return SpectralField(field.lattice, field.coeffs * mult)
    if kind == "cube":
        if cube is None:
            raise ValueError("kind='cube' requires cube bounds")
        lo, hi = cube
        x1, x2, x3 = field.lattice.xi_components()
        mask = ((x1 >= lo[0]) & (x1 <= hi[0]) & (x2 >= lo[1]) & (x2 <= hi[1])
                & (x3 >= lo[2]) & (x3 <= hi[2]))
        return SpectralField(field.lattice, field.coeffs * mask)
    raise ValueError(f"unknown projection kind {kind!r}")


def sobolev_norm(field: SpectralField, s: float) -> float:
    """H^s norm with the isotropic bracket: (sum (1+|xi|^2)^s |uhat|^2)^(1/2)."""
    w = field.lattice.bracket_sq() ** s
    return float(np.sqrt(np.sum(w * np.abs(field.coeffs) ** 2)))
