"""Plane-wave Hamiltonians -Delta + V: assembly, application, eigensolvers.

The Galerkin matrix over the truncated lattice is

    H[a, b] = symbol(xi_a) delta_ab + Vhat[(xi_a - xi_b) mod P],

where Vhat is the FFT of the potential on its own P^3 collocation grid.  The
FFT-based matvec multiplies by V on that same grid, which reproduces the
matrix action exactly (same circular indexing), so the dense and iterative
eigensolver paths agree to round-off whenever P >= 4N+1.

Both paths share deterministic post-processing: ascending eigenvalues,
degenerate clusters ordered by the lexicographic position of each vector's
dominant coefficient, and a phase fix making that coefficient real positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .geometry import Convention, FrequencyLattice, TorusGeometry
from .spectral import _embed_indices

_TIE_REL_TOL = 1e-8


def hamiltonian_matrix(v_values: np.ndarray, lattice: FrequencyLattice,
                       geometry: TorusGeometry, convention: Convention,
                       row_chunk: int = 256) -> np.ndarray:
    """Dense (D, D) Hermitian Galerkin matrix of -Delta + V."""
    v_values = np.asarray(v_values, dtype=float)
    p = v_values.shape[0]
    n = lattice.n
    if p < 4 * n + 1:
        raise ValueError(
            f"potential grid {p} cannot resolve coefficient differences; need >= {4 * n + 1}")
    vhat = sfft.fftn(v_values.astype(complex), norm="forward")
    pts = lattice.points()  # (D, 3) lexicographic
    d = lattice.count
    h = np.empty((d, d), dtype=complex)
    for start in range(0, d, row_chunk):
        stop = min(start + row_chunk, d)
        diff = (pts[start:stop, None, :] - pts[None, :, :]) % p
        h[start:stop] = vhat[diff[..., 0], diff[..., 1], diff[..., 2]]
    sym = lattice.symbol_values(geometry, convention).ravel()
    h[np.arange(d), np.arange(d)] += sym
    return h


def apply_hamiltonian(coeffs: np.ndarray, v_values: np.ndarray,
                      lattice: FrequencyLattice, geometry: TorusGeometry,
                      convention: Convention) -> np.ndarray:
    """(-Delta + V) applied to lattice coefficients via padded FFTs.

    ``coeffs`` may be a single cube or a stack (..., 2n+1, 2n+1, 2n+1).
    """
    v_values = np.asarray(v_values, dtype=float)
    p = v_values.shape[0]
    n = lattice.n
    idx = _embed_indices(n, p)
    sym = lattice.symbol_values(geometry, convention)
    c = np.asarray(coeffs, dtype=complex)
    single = c.ndim == 3
    if single:
        c = c[None]
    big = np.zeros(c.shape[:1] + (p, p, p), dtype=complex)
    big[(slice(None),) + np.ix_(idx, idx, idx)] = c
    grid = sfft.ifftn(big, axes=(1, 2, 3), norm="forward")
    grid *= v_values
    back = sfft.fftn(grid, axes=(1, 2, 3), norm="forward")
    out = back[(slice(None),) + np.ix_(idx, idx, idx)] + sym * c
    return out[0] if single else out


@dataclass
class EigenSolution:
    """Lowest eigenpairs of -Delta + V, deterministically ordered."""

    mu: np.ndarray            # ascending, shape (k,)
    vectors: np.ndarray       # orthonormal rows, shape (k, D)
    residual_max: float       # max_k ||H u_k - mu_k u_k||_2
    operator_scale: float     # upper estimate of ||H||_2 for relative residuals


def _dominant_order_and_phase(mu: np.ndarray, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Order degenerate clusters by dominant-coefficient position; fix phases."""
    order = np.argsort(mu, kind="stable")
    mu = mu[order]
    vectors = vectors[order]
    k = mu.size
    dom = np.argmax(np.abs(vectors), axis=1)
    # cluster boundaries on near-equal eigenvalues
    start = 0
    perm = np.arange(k)
    for i in range(1, k + 1):
        boundary = i == k or (mu[i] - mu[i - 1]) > _TIE_REL_TOL * max(1.0, abs(mu[i - 1]))
        if boundary:
            if i - start > 1:
                sub = np.argsort(dom[start:i], kind="stable")
                perm[start:i] = start + sub
            start = i
    mu = mu[perm]
    vectors = vectors[perm]
    dom = dom[perm]
    lead = vectors[np.arange(k), dom]
    phase = np.conj(lead) / np.abs(lead)
    vectors = vectors * phase[:, None]
    return mu, vectors


def _finalize(mu: np.ndarray, vectors: np.ndarray, v_values: np.ndarray,
              lattice: FrequencyLattice, geometry: TorusGeometry,
              convention: Convention) -> EigenSolution:
    mu, vectors = _dominant_order_and_phase(mu, vectors)
    cubes = vectors.reshape((-1,) + lattice.shape)
    hv = apply_hamiltonian(cubes, v_values, lattice, geometry, convention)
    res = hv - mu[:, None, None, None] * cubes
    residual_max = float(np.max(np.sqrt(np.sum(np.abs(res) ** 2, axis=(1, 2, 3)))))
    scale = float(np.max(lattice.symbol_values(geometry, convention)) + np.max(np.abs(v_values)))
    return EigenSolution(mu, vectors, residual_max, scale)


def eigensolve_dense(v_values: np.ndarray, lattice: FrequencyLattice,
                     geometry: TorusGeometry, convention: Convention,
                     k: int, h: np.ndarray | None = None) -> EigenSolution:
    """Lowest k eigenpairs via LAPACK on the dense Galerkin matrix."""
    d = lattice.count
    if not (1 <= k <= d):
        raise ValueError(f"k must lie in [1, {d}], got {k}")
    if h is None:
        h = hamiltonian_matrix(v_values, lattice, geometry, convention)
    if k == d:
        w, v = sla.eigh(h)
    else:
        w, v = sla.eigh(h, subset_by_index=[0, k - 1], driver="evr")
    return _finalize(w, v.T.copy(), v_values, lattice, geometry, convention)


def eigensolve_iterative(v_values: np.ndarray, lattice: FrequencyLattice,
                         geometry: TorusGeometry, convention: Convention,
                         k: int, maxiter: int | None = None) -> EigenSolution:
    """Lowest k eigenpairs via Lanczos on the FFT-based operator.

    Deterministic: the start vector is fixed, and ARPACK is deterministic for
    fixed inputs.  Suited to large lattices with k << D.
    """
    d = lattice.count
    if not (1 <= k < d):
        raise ValueError(f"iterative path needs 1 <= k < D = {d}, got {k}")

    def matvec(x):
        cube = x.reshape(lattice.shape)
        return apply_hamiltonian(cube, v_values, lattice, geometry, convention).ravel()

    op = spla.LinearOperator((d, d), matvec=matvec, dtype=complex)
    v0 = np.full(d, 1.0 / np.sqrt(d))
    ncv = min(d - 1, max(2 * k + 1, 40))
    w, v = spla.eigsh(op, k=k, which="SA", v0=v0, ncv=ncv,
                      maxiter=maxiter or max(8000, 400 * k))
    return _finalize(w, v.T.copy(), v_values, lattice, geometry, convention)


def eigensolve_auto(v_values: np.ndarray, lattice: FrequencyLattice,
                    geometry: TorusGeometry, convention: Convention,
                    k: int) -> EigenSolution:
    """Dense for small problems or large k; iterative for large D and few pairs."""
    d = lattice.count
    if d <= 3000 or k >= d // 8:
        return eigensolve_dense(v_values, lattice, geometry, convention, k)
    return eigensolve_iterative(v_values, lattice, geometry, convention, k)
