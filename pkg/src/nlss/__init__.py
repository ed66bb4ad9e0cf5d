"""Pseudospectral solvers for cubic and quintic NLS systems on flat 3-tori.

Library layout:

    geometry      torus coefficients, frequency lattice, Fourier symbols
    spectral      fields, transforms, free propagator, projections, norms
    ensemble      (u, lambda) states, density, masses, energies, perturbation
    casimir       occupation function families f, F, F*, class validation
    functionals   Psi, energy-Casimir, G, dual Phi, truncated traces
    operators     plane-wave Hamiltonians and eigensolvers
    stationary    chemical shift, SCF fixed point, stationarity residuals
    dynamics      Strang splitting evolution with conservation observers
    certificates  empirical space-time dispersion ratio checks
    experiments   stability experiment and the validation suite
    snapshots     binary field / ensemble snapshot formats
    config, cli   TOML run configuration and the command-line harness
"""

from .casimir import (Boltzmann, CasimirFunction, CasimirValidation,
                      ShiftedPower, make_casimir, validate_casimir)
from .certificates import (CertificateResult, bilinear_ratio, linear_ratio,
                           strichartz_certificate)
from .config import ConfigError, RunConfig, parse_config
from .dynamics import (EvolutionConfig, TimeSeries, evolve, nonlinear_substep,
                       strang_step)
from .ensemble import (DensityField, EnsembleState, default_padding, density,
                       energy, gram_deviation, gram_matrix, hs_lambda_norm,
                       kinetic_energy, mass, perturb, random_orthonormal_state,
                       state_from_matrix)
from .experiments import (StabilityReport, ValidationReport, random_smooth_state,
                          run_stability_experiment, run_validation_suite)
from .functionals import (PotentialField, TraceResult, TraceTail,
                          casimir_tail_sum, constant_potential, dual_phi,
                          energy_casimir, g_functional, li_yau_constant,
                          potential_from_density, psi_f, trace_f)
from .geometry import (SQUARE_TORUS, Convention, FrequencyLattice, TorusGeometry,
                       laplacian_symbol, q_form)
from .operators import (EigenSolution, apply_hamiltonian, eigensolve_auto,
                        eigensolve_dense, eigensolve_iterative,
                        hamiltonian_matrix)
from .snapshots import (read_ensemble_snapshot, read_field_snapshot,
                        write_ensemble_snapshot, write_field_snapshot)
from .spectral import (SpectralField, constant_field, free_propagate, from_grid,
                       lp_project, random_field, smooth_cutoff, sobolev_norm,
                       to_grid, transform, unit_mode)
from .stationary import (HamiltonianRep, ScfConfig, ScfError, StationaryReport,
                         StationaryState, TailModel, build_hamiltonian,
                         eigensolve, scf_solve, solve_sigma, verify_stationary)

__version__ = "0.1.0"
