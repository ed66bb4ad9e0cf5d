"""Torus geometry, frequency lattice, and Fourier symbols.

The rectangular flat torus with side lengths L_j is realized on the unit
coordinate cube; the geometry enters through the anisotropy coefficients
theta_j = L_j**-2 carried by the quadratic form

    Q(xi) = theta_1 xi_1**2 + theta_2 xi_2**2 + theta_3 xi_3**2.

Two symbol conventions for -Delta on the basis exp(2*pi*i xi.x) are
supported: ``standard`` uses 4*pi**2 Q(xi) (the analytic symbol of the
Laplace-Beltrami operator), ``paper`` uses 2*pi*Q(xi) so the free propagator
multiplier is exactly exp(-2*pi*i*t*Q(xi)).  One convention is fixed per run;
all operators, energies and eigenvalues must use the same one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class Convention(enum.Enum):
    """Normalization of the Laplacian symbol (see module docstring)."""

    STANDARD = "standard"
    PAPER = "paper"

    @classmethod
    def parse(cls, value) -> "Convention":
        if isinstance(value, Convention):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown convention {value!r}; expected 'standard' or 'paper'"
            ) from None


@dataclass(frozen=True)
class TorusGeometry:
    """Anisotropy coefficients theta = (theta_1, theta_2, theta_3).

    Each theta_j must lie in (0, 1]; theta_j = L_j**-2 for side length L_j.
    """

    theta: tuple[float, float, float]

    def __post_init__(self):
        if len(self.theta) != 3:
            raise ValueError("theta must have exactly three components")
        theta = tuple(float(t) for t in self.theta)
        for t in theta:
            if not (0.0 < t <= 1.0):
                raise ValueError(f"theta components must lie in (0, 1], got {theta}")
        object.__setattr__(self, "theta", theta)

    @property
    def side_lengths(self) -> tuple[float, float, float]:
        return tuple(t ** -0.5 for t in self.theta)


SQUARE_TORUS = TorusGeometry((1.0, 1.0, 1.0))


def q_form(geometry: TorusGeometry, xi) -> float:
    """Anisotropic quadratic form Q(xi) = sum_j theta_j xi_j**2.

    ``xi`` may be a single integer triple or an array whose last axis has
    length 3; returns a scalar or an array accordingly.
    """
    xi = np.asarray(xi, dtype=float)
    th = np.asarray(geometry.theta)
    out = np.tensordot(xi ** 2, th, axes=([-1], [0]))
    return float(out) if out.ndim == 0 else out


def laplacian_symbol(geometry: TorusGeometry, xi, convention: Convention) -> float:
    """Symbol of -Delta at frequency xi under the chosen convention."""
    factor = 4.0 * np.pi ** 2 if convention is Convention.STANDARD else 2.0 * np.pi
    return factor * q_form(geometry, xi)


@lru_cache(maxsize=32)
def _xi_components(n: int):
    """Component arrays xi_1, xi_2, xi_3 on the (2n+1)^3 lattice, C-ordered.

    C order of the (xi+n)-indexed cube is exactly lexicographic order in
    (xi_1, xi_2, xi_3), which is the serialization order of snapshots.
    """
    axis = np.arange(-n, n + 1)
    comps = np.meshgrid(axis, axis, axis, indexing="ij")
    for c in comps:
        c.setflags(write=False)
    return tuple(comps)


@dataclass(frozen=True)
class FrequencyLattice:
    """Galerkin truncation {xi in Z^3 : |xi_i| <= n} in lexicographic order."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("lattice radius must be a positive integer")

    @property
    def linear_size(self) -> int:
        return 2 * self.n + 1

    @property
    def shape(self) -> tuple[int, int, int]:
        m = self.linear_size
        return (m, m, m)

    @property
    def count(self) -> int:
        return self.linear_size ** 3

    def xi_components(self):
        """Three int arrays of shape (2n+1,)*3 giving xi_1, xi_2, xi_3."""
        return _xi_components(self.n)

    def points(self) -> np.ndarray:
        """All lattice points as an (count, 3) int array, lexicographic."""
        x1, x2, x3 = self.xi_components()
        return np.stack([x1.ravel(), x2.ravel(), x3.ravel()], axis=1)

    def q_values(self, geometry: TorusGeometry) -> np.ndarray:
        x1, x2, x3 = self.xi_components()
        t1, t2, t3 = geometry.theta
        return t1 * x1.astype(float) ** 2 + t2 * x2.astype(float) ** 2 + t3 * x3.astype(float) ** 2

    def symbol_values(self, geometry: TorusGeometry, convention: Convention) -> np.ndarray:
        """laplacian_symbol evaluated across the lattice (same shape as coeffs)."""
        factor = 4.0 * np.pi ** 2 if convention is Convention.STANDARD else 2.0 * np.pi
        return factor * self.q_values(geometry)

    def bracket_sq(self) -> np.ndarray:
        """Isotropic 1 + |xi|^2 across the lattice (Sobolev weight base)."""
        x1, x2, x3 = self.xi_components()
        return 1.0 + (x1.astype(float) ** 2 + x2.astype(float) ** 2 + x3.astype(float) ** 2)

    def free_spectrum(self, geometry: TorusGeometry, convention: Convention) -> np.ndarray:
        """All eigenvalues of the truncated free -Delta, sorted ascending."""
        return np.sort(self.symbol_values(geometry, convention).ravel())
