"""Empirical space-time dispersion certificates for the free propagator.

These are bounded-ratio sanity checks, not sharp-constant estimates: for
random unit-mass data supported in [-N, N]^3 the linear certificate records

    || exp(it Delta) f ||_{L^p_{t,x}([0,1] x T^3)} / N^(3/2 - 5/p),   p > 10/3,

and the bilinear certificate records

    || exp(itD)u1 exp(itD)u2 ||_{L^2_{t,x}} / (min(N1,N2)^(1/2) ||u1|| ||u2||).

Time integrals use a 256-node trapezoid rule on [0,1]; space integrals are
collocation sums on a grid padded enough to be exact for p in {2, 4} and a
quadrature approximation otherwise.  Ratios are invariant under rescaling of
the data.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .geometry import Convention, FrequencyLattice, TorusGeometry
from .reports import nlss_threads
from .spectral import SpectralField, random_field, to_grid

TIME_NODES = 256


def _spacetime_lp(field: SpectralField, p: float, geometry: TorusGeometry,
                  convention: Convention, grid_size: int, time_nodes: int) -> float:
    """|| exp(it Delta) field ||_{L^p_{t,x}} over t in [0,1], trapezoid in t."""
    sym = field.lattice.symbol_values(geometry, convention)
    times = np.linspace(0.0, 1.0, time_nodes)
    slab = np.empty(time_nodes)
    for i, t in enumerate(times):
        prop = SpectralField(field.lattice, field.coeffs * np.exp(-1j * t * sym))
        g = to_grid(prop, grid_size)
        slab[i] = np.mean(np.abs(g) ** p)
    return float(np.trapezoid(slab, times) ** (1.0 / p))


def linear_ratio(field: SpectralField, p: float, geometry: TorusGeometry,
                 convention: Convention, time_nodes: int = TIME_NODES) -> float:
    """Certificate ratio for one datum supported in [-N, N]^3."""
    if p <= 10.0 / 3.0:
        raise ValueError(f"linear certificate requires p > 10/3, got {p}")
    n = field.lattice.n
    norm = field.l2_norm()
    if norm == 0.0:
        raise ValueError("zero field has no certificate ratio")
    grid = 2 * field.lattice.linear_size
    value = _spacetime_lp(field, p, geometry, convention, grid, time_nodes)
    return value / (n ** (1.5 - 5.0 / p) * norm)


def bilinear_ratio(f1: SpectralField, f2: SpectralField, geometry: TorusGeometry,
                   convention: Convention, time_nodes: int = TIME_NODES) -> float:
    """Certificate ratio for a pair supported in [-N1,N1]^3 x [-N2,N2]^3."""
    n1, n2 = f1.lattice.n, f2.lattice.n
    norm1, norm2 = f1.l2_norm(), f2.l2_norm()
    if norm1 == 0.0 or norm2 == 0.0:
        raise ValueError("zero field has no certificate ratio")
    grid = sfft.next_fast_len(2 * (n1 + n2) + 1)
    sym1 = f1.lattice.symbol_values(geometry, convention)
    sym2 = f2.lattice.symbol_values(geometry, convention)
    times = np.linspace(0.0, 1.0, time_nodes)
    slab = np.empty(time_nodes)
    for i, t in enumerate(times):
        g1 = to_grid(SpectralField(f1.lattice, f1.coeffs * np.exp(-1j * t * sym1)), grid)
        g2 = to_grid(SpectralField(f2.lattice, f2.coeffs * np.exp(-1j * t * sym2)), grid)
        slab[i] = np.mean(np.abs(g1 * g2) ** 2)
    value = float(np.sqrt(np.trapezoid(slab, times)))
    return value / (min(n1, n2) ** 0.5 * norm1 * norm2)


@dataclass
class CertificateResult:
    """Ratio statistics for one certificate family."""

    mode: str                 # "linear" or "bilinear"
    n1: int
    n2: int | None
    p: float | None
    n_samples: int
    seed: int
    time_nodes: int
    ratios: np.ndarray

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios))

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "n1": self.n1,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "time_nodes": self.time_nodes,
            "ratios": [float(r) for r in self.ratios],
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
        }
        if self.n2 is not None:
            out["n2"] = self.n2
        if self.p is not None:
            out["p"] = self.p
        return out


def _map_samples(fn, n_samples: int) -> np.ndarray:
    """Run per-sample tasks on the NLSS_THREADS pool; order-stable output."""
    workers = nlss_threads()
    if workers == 1 or n_samples == 1:
        return np.array([fn(i) for i in range(n_samples)])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, range(n_samples))))


def strichartz_certificate(geometry: TorusGeometry, n: int, p: float | None,
                           n_samples: int, mode: str, seed: int,
                           convention: Convention = Convention.STANDARD,
                           n2: int | None = None,
                           time_nodes: int = TIME_NODES) -> CertificateResult:
    """Ratio statistics over random unit-mass data.

    mode='linear' draws data on the radius-n lattice (p > 10/3 required);
    mode='bilinear' draws pairs on radii (n, n2) and ignores p.
    """
    if mode == "linear":
        if p is None:
            raise ValueError("linear certificate requires p")
        lattice = FrequencyLattice(n)

        def one(i: int) -> float:
            rng = np.random.default_rng((seed, i))
            return linear_ratio(random_field(lattice, rng), p, geometry,
                                convention, time_nodes)

        ratios = _map_samples(one, n_samples)
        return CertificateResult("linear", n, None, p, n_samples, seed,
                                 time_nodes, ratios)
    if mode == "bilinear":
        lat1 = FrequencyLattice(n)
        lat2 = FrequencyLattice(n2 if n2 is not None else n)

        def one(i: int) -> float:
            rng = np.random.default_rng((seed, i))
            return bilinear_ratio(random_field(lat1, rng), random_field(lat2, rng),
                                  geometry, convention, time_nodes)

        ratios = _map_samples(one, n_samples)
        return CertificateResult("bilinear", n, lat2.n, None, n_samples, seed,
                                 time_nodes, ratios)
    raise ValueError(f"unknown certificate mode {mode!r}")
