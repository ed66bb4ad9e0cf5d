"""Command-line harness: spectrum, stationary, evolve, stability, certify, validate.

Flags mirror config keys and override values from --config.  All artifacts
land under --out (JSON reports, CSV series, binary ensemble snapshots) and
are written atomically.  Runs with identical config and seed produce
byte-identical outputs regardless of NLSS_THREADS.  Exit code 0 means no
suite family failed and no run aborted.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .certificates import strichartz_certificate
from .config import ConfigError, RunConfig, parse_config
from .dynamics import evolve
from .ensemble import gram_deviation
from .experiments import (random_smooth_state, run_stability_experiment,
                          run_validation_suite)
from .functionals import li_yau_constant
from .operators import eigensolve_auto
from .reports import dump_json
from .snapshots import read_ensemble_snapshot, write_ensemble_snapshot
from .stationary import scf_solve, verify_stationary


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML run configuration file")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--n", type=int, help="lattice truncation radius")
    parser.add_argument("--lambda", dest="lam", type=float, help="total occupation")
    parser.add_argument("--alpha", type=int, choices=(1, 2), help="nonlinearity exponent")
    parser.add_argument("--beta", type=float, help="boltzmann casimir parameter")
    parser.add_argument("--theta", help="comma-separated torus coefficients t1,t2,t3")
    parser.add_argument("--convention", choices=("standard", "paper"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--tol", type=float, help="SCF tolerance for V and Lambda residuals")


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = parse_config(args.config) if args.config else RunConfig()
    updates = {}
    if args.n is not None:
        updates["n"] = args.n
    if args.lam is not None:
        updates["lam_total"] = args.lam
    if args.alpha is not None:
        updates["alpha"] = args.alpha
    if args.theta is not None:
        try:
            theta = tuple(float(v) for v in args.theta.split(","))
        except ValueError:
            raise ConfigError(f"bad --theta value {args.theta!r}") from None
        updates["theta"] = theta
    if args.convention is not None:
        updates["convention"] = args.convention
    if args.seed is not None:
        updates["seed"] = args.seed
    if updates:
        config = dataclasses.replace(config, **updates)
    if args.beta is not None:
        config = dataclasses.replace(
            config, casimir=dataclasses.replace(config.casimir, beta=args.beta))
    if args.tol is not None:
        config = dataclasses.replace(
            config, scf=dataclasses.replace(config.scf, tol_v=args.tol,
                                            tol_lambda=args.tol))
    for name in ("dt", "steps", "cadence", "sign"):
        value = getattr(args, name, None)
        if value is not None:
            key = "coupling_sign" if name == "sign" else name
            config = dataclasses.replace(
                config, evolution=dataclasses.replace(config.evolution, **{key: value}))
    for name in ("amplitude", "band"):
        value = getattr(args, name, None)
        if value is not None:
            config = dataclasses.replace(
                config, perturbation=dataclasses.replace(config.perturbation,
                                                         **{name: value}))
    for name in ("horizon", "samples"):
        value = getattr(args, name, None)
        if value is not None:
            config = dataclasses.replace(
                config, stability=dataclasses.replace(config.stability, **{name: value}))
    if getattr(args, "p", None) is not None:
        config = dataclasses.replace(
            config, certify=dataclasses.replace(config.certify, p=args.p))
    return config.validate()


def _cmd_spectrum(args) -> int:
    config = _load_config(args)
    lattice, geometry = config.lattice(), config.geometry()
    convention = config.convention_enum()
    k = min(getattr(args, "k", 64) or 64, lattice.count)
    v0 = np.zeros((2 * lattice.linear_size,) * 3)
    sol = eigensolve_auto(v0, lattice, geometry, convention, k)
    exact = lattice.free_spectrum(geometry, convention)[:k]
    c = li_yau_constant(exact)
    dump_json({
        "n": config.n, "theta": list(config.theta), "convention": config.convention,
        "k": k, "mu": [float(m) for m in sol.mu],
        "max_deviation_from_lattice": float(np.max(np.abs(sol.mu - exact))),
        "li_yau_c": c,
        "eigensolver_residual_max": sol.residual_max,
    }, os.path.join(args.out, "spectrum.json"))
    return 0


def _cmd_stationary(args) -> int:
    config = _load_config(args)
    cf = config.build_casimir()
    st = scf_solve(config.scf_config())
    report = verify_stationary(st, cf)
    dump_json({
        "n": config.n, "alpha": config.alpha, "lambda": config.lam_total,
        "theta": list(config.theta), "convention": config.convention,
        "casimir": dataclasses.asdict(config.casimir),
        "sigma": st.sigma, "phi": st.phi,
        "mu": [float(m) for m in st.energies],
        "occupations": [float(l) for l in st.occupations],
        "residuals": report.to_dict(),
        "iterations": [
            {"iteration": it.iteration, "sigma": it.sigma, "phi": it.phi,
             "residual_v": it.residual_v, "residual_lambda": it.residual_lambda,
             "occupied": it.occupied, "accepted": it.accepted, "eta": it.eta}
            for it in st.iterations
        ],
    }, os.path.join(args.out, "stationary.json"))
    write_ensemble_snapshot(os.path.join(args.out, "ensemble"), st.ensemble())
    return 0


def _cmd_evolve(args) -> int:
    config = _load_config(args)
    cf = config.build_casimir()
    if args.state:
        state = read_ensemble_snapshot(args.state)
    else:
        state = random_smooth_state(config.lattice(), config.j, config.lam_total,
                                    config.geometry(), config.convention_enum(),
                                    config.seed)
    final, series = evolve(state, config.evolution_config(), cf=cf)
    series.to_csv(os.path.join(args.out, "series.csv"))
    write_ensemble_snapshot(os.path.join(args.out, "final"), final)
    m = series.column("mass")
    e = series.column("energy")
    dump_json({
        "aborted": series.aborted,
        "samples": len(series),
        "mass_drift": float(np.max(np.abs(m - m[0])) / max(abs(m[0]), 1e-300)),
        "energy_drift": float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-300)),
        "final_gram_deviation": gram_deviation(final),
    }, os.path.join(args.out, "evolve.json"))
    return 1 if series.aborted else 0


def _cmd_stability(args) -> int:
    config = _load_config(args)
    report = run_stability_experiment(config)
    dump_json(report.to_dict(), os.path.join(args.out, "stability.json"))
    report.series.to_csv(os.path.join(args.out, "series.csv"))
    return 1 if report.violated else 0


def _cmd_certify(args) -> int:
    config = _load_config(args)
    geometry, convention = config.geometry(), config.convention_enum()
    c = config.certify
    out = {"linear": [], "bilinear": []}
    for n in c.n_values:
        cert = strichartz_certificate(geometry, int(n), c.p, c.n_samples,
                                      "linear", config.seed, convention)
        out["linear"].append(cert.to_dict())
    for n1 in c.bilinear_n_values:
        for n2 in c.bilinear_n_values:
            cert = strichartz_certificate(geometry, int(n1), None, c.bilinear_samples,
                                          "bilinear", config.seed, convention,
                                          n2=int(n2))
            out["bilinear"].append(cert.to_dict())
    dump_json(out, os.path.join(args.out, "certificates.json"))
    return 0


def _cmd_validate(args) -> int:
    config = _load_config(args)
    report = run_validation_suite(config, fault=args.fault or None)
    dump_json(report.to_dict(), os.path.join(args.out, "validation.json"))
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlss",
        description="Pseudospectral solver suite for cubic/quintic NLS systems "
                    "on rectangular flat 3-tori")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of the free operator")
    _add_common(p)
    p.add_argument("--k", type=int, default=64, help="number of eigenvalues")
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("stationary", help="self-consistent stationary state")
    _add_common(p)
    p.set_defaults(fn=_cmd_stationary)

    p = sub.add_parser("evolve", help="time evolution with observers")
    _add_common(p)
    p.add_argument("--state", help="ensemble snapshot directory for initial data")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--cadence", type=int)
    p.add_argument("--sign", type=int, choices=(1, -1))
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("stability", help="energy-Casimir stability experiment")
    _add_common(p)
    p.add_argument("--dt", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--band", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--samples", type=int)
    p.set_defaults(fn=_cmd_stability)

    p = sub.add_parser("certify", help="dispersion certificate sweeps")
    _add_common(p)
    p.add_argument("--p", type=float)
    p.set_defaults(fn=_cmd_certify)

    p = sub.add_parser("validate", help="run every property family")
    _add_common(p)
    p.add_argument("--fault", choices=("fstar_sign_flip",),
                   help="inject a known fault (suite self-test)")
    p.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
