"""Casimir-class occupation functions f, their antiderivative F, and duals.

A Casimir-class function is continuous, positive, strictly decreasing with
f(s) -> inf as s -> -inf, and decays at least like (1+s)^(-5/2-eps) on s >= 0.
It assigns occupation numbers to energy levels via lambda = f(mu + sigma).

Derived objects:

    F(s)  = integral_s^inf f                (nonnegative, convex, decreasing)
    F*(y) = sup_s (y s - F(s))              (finite for y <= 0, +inf for y > 0)
    (F*)' = (F')^{-1},  i.e. (F*)'(-lam) is the unique s with f(s) = lam.

Two concrete families are shipped: Boltzmann f(s) = exp(-beta*s), and a
shifted-power family f(s) = (1+s)^(-p) for s >= 0 glued to (1-s)^r for s < 0
(an artifact-defined family with non-exponential decay, used to exercise the
class conditions; only p > 5/2 actually satisfies the decay condition).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq


class CasimirFunction:
    """Base class; subclasses provide f and may override the derived maps.

    The generic fallbacks (adaptive quadrature for F, bracketed monotone
    root-finding for f^{-1}) target 1e-12 absolute accuracy and only assume
    the class conditions.
    """

    def f(self, s):
        raise NotImplementedError

    def big_f(self, s):
        """F(s) = integral_s^inf f, by adaptive quadrature unless overridden."""
        s_arr = np.asarray(s, dtype=float)
        if s_arr.ndim > 0:
            return np.array([self.big_f(float(v)) for v in s_arr.ravel()]).reshape(s_arr.shape)
        val, _ = quad(lambda x: float(self.f(x)), float(s_arr), np.inf,
                      epsabs=1e-12, epsrel=1e-12, limit=200)
        return val

    def f_inverse(self, lam: float) -> float:
        """Unique s with f(s) = lam, for lam > 0 (f is a bijection onto (0,inf))."""
        if lam <= 0.0:
            raise ValueError("f takes only positive values")
        g = lambda s: float(self.f(s)) - lam
        lo, hi = -1.0, 1.0
        for _ in range(200):
            if g(lo) > 0.0:
                break
            lo *= 2.0
        for _ in range(200):
            if g(hi) < 0.0:
                break
            hi *= 2.0
        return brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=300)

    def f_star(self, y):
        """Legendre transform F*(y) = sup_s (y s - F(s)).

        F >= 0 with inf 0, so F*(0) = 0 and F*(y) = +inf for y > 0 (returned
        as math.inf, the out-of-domain marker).  For y < 0 the supremum sits
        at the unique s* with f(s*) = -y.
        """
        y_arr = np.asarray(y, dtype=float)
        if y_arr.ndim > 0:
            return np.array([self.f_star(float(v)) for v in y_arr.ravel()]).reshape(y_arr.shape)
        y = float(y_arr)
        if y > 0.0:
            return math.inf
        if y == 0.0:
            return 0.0
        s_star = self.f_inverse(-y)
        return y * s_star - float(self.big_f(s_star))

    def f_star_prime(self, y: float) -> float:
        """(F*)'(y) = (F')^{-1}(y): the unique s with -f(s) = y; needs y < 0."""
        if y >= 0.0:
            raise ValueError(f"(F*)' needs y < 0 (interior of dom F*), got {y}")
        return self.f_inverse(-y)

    def decay_parameters(self) -> tuple[float, float]:
        """Analytic (C, eps) with f(s) <= C (1+s)^(-5/2-eps) for s >= 0."""
        raise NotImplementedError

    def validate(self) -> "CasimirValidation":
        C, eps = self.decay_parameters()
        return validate_casimir(self.f, C, eps)


@dataclass
class Boltzmann(CasimirFunction):
    """f(s) = exp(-beta*s), beta > 0.  All derived maps in closed form."""

    beta: float

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")

    def f(self, s):
        return np.exp(-self.beta * np.asarray(s, dtype=float))

    def big_f(self, s):
        return np.exp(-self.beta * np.asarray(s, dtype=float)) / self.beta

    def f_inverse(self, lam: float) -> float:
        if lam <= 0.0:
            raise ValueError("f takes only positive values")
        return -math.log(lam) / self.beta

    def f_star(self, y):
        y_arr = np.asarray(y, dtype=float)
        lam = -y_arr
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = lam / self.beta * (np.log(lam) - 1.0)
        vals = np.where(lam == 0.0, 0.0, vals)
        vals = np.where(lam < 0.0, math.inf, vals)
        return float(vals) if vals.ndim == 0 else vals

    def decay_parameters(self) -> tuple[float, float]:
        eps = 0.5
        s_bar = (2.5 + eps) / self.beta - 1.0
        if s_bar <= 0.0:
            return 1.0, eps
        return math.exp(-self.beta * s_bar) * (1.0 + s_bar) ** (2.5 + eps), eps


@dataclass
class ShiftedPower(CasimirFunction):
    """f(s) = (1+s)^(-p) for s >= 0, (1-s)^r for s < 0 (continuous, f(0)=1).

    p > 1 is required for F to be finite; the class decay condition (iii)
    additionally needs p > 5/2 and is checked by validation, not construction.
    """

    p: float
    r: float

    def __post_init__(self):
        if self.p <= 1.0:
            raise ValueError("p must exceed 1 for F(s) to converge")
        if self.r <= 0.0:
            raise ValueError("r must be positive")

    def f(self, s):
        s = np.asarray(s, dtype=float)
        pos = (1.0 + np.maximum(s, 0.0)) ** (-self.p)
        neg = (1.0 - np.minimum(s, 0.0)) ** self.r
        out = np.where(s >= 0.0, pos, neg)
        return float(out) if out.ndim == 0 else out

    def big_f(self, s):
        s = np.asarray(s, dtype=float)
        f0 = 1.0 / (self.p - 1.0)
        pos = (1.0 + np.maximum(s, 0.0)) ** (1.0 - self.p) / (self.p - 1.0)
        neg = f0 + ((1.0 - np.minimum(s, 0.0)) ** (self.r + 1.0) - 1.0) / (self.r + 1.0)
        out = np.where(s >= 0.0, pos, neg)
        return float(out) if out.ndim == 0 else out

    def f_inverse(self, lam: float) -> float:
        if lam <= 0.0:
            raise ValueError("f takes only positive values")
        if lam <= 1.0:
            return lam ** (-1.0 / self.p) - 1.0
        return 1.0 - lam ** (1.0 / self.r)

    def f_star(self, y):
        y_arr = np.asarray(y, dtype=float)
        if y_arr.ndim > 0:
            return np.array([self.f_star(float(v)) for v in y_arr.ravel()]).reshape(y_arr.shape)
        y = float(y_arr)
        if y > 0.0:
            return math.inf
        if y == 0.0:
            return 0.0
        s_star = self.f_inverse(-y)
        return y * s_star - self.big_f(s_star)

    def decay_parameters(self) -> tuple[float, float]:
        return 1.0, self.p - 2.5


def make_casimir(family: str, *, beta: float | None = None,
                 p: float | None = None, r: float | None = None) -> CasimirFunction:
    """Factory matching the config schema (casimir.family/beta/p/r)."""
    family = family.lower()
    if family == "boltzmann":
        if beta is None:
            raise ValueError("boltzmann family requires casimir.beta")
        return Boltzmann(beta=beta)
    if family == "shifted_power":
        if p is None or r is None:
            raise ValueError("shifted_power family requires casimir.p and casimir.r")
        return ShiftedPower(p=p, r=r)
    raise ValueError(f"unknown casimir family {family!r}")


# --- class-membership validation ---------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class CasimirValidation:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def validate_casimir(f, decay_constant: float, decay_epsilon: float,
                     s_grid: np.ndarray | None = None) -> CasimirValidation:
    """Numerically check the class conditions for a candidate f.

    (i)   continuity and positivity at sampled points,
    (ii)  strict decrease on the sample grid and divergence as s -> -inf,
    (iii) f(s) <= C (1+s)^(-5/2-eps) on s >= 0 with the supplied (C, eps).

    Returns a report listing every check; never raises on failures.
    """
    report = CasimirValidation()
    if s_grid is None:
        # the positive probe stops at 100 so strictly positive exponential
        # tails stay above the double-precision underflow threshold
        s_grid = np.concatenate([-np.geomspace(100.0, 1e-3, 40), [0.0],
                                 np.geomspace(1e-3, 100.0, 60)])
    s_grid = np.sort(np.asarray(s_grid, dtype=float))
    vals = np.array([float(f(s)) for s in s_grid])

    report.checks.append(CheckResult(
        "positivity", bool(np.all(vals > 0.0)),
        f"min f on grid = {vals.min():.3e}"))

    # continuity: shrinking symmetric differences at a few interior points
    cont_ok = True
    for s in (-10.0, -1.0, 0.0, 1.0, 10.0):
        base = float(f(s))
        diffs = [abs(float(f(s + h)) - base) + abs(float(f(s - h)) - base)
                 for h in (1e-4, 1e-6, 1e-8)]
        scale = max(abs(base), 1e-30)
        if not (diffs[-1] <= 1e-6 * scale and diffs[-1] <= diffs[0] + 1e-12 * scale):
            cont_ok = False
    report.checks.append(CheckResult("continuity", cont_ok))

    strictly_dec = bool(np.all(np.diff(vals) < 0.0))
    report.checks.append(CheckResult(
        "strict_decrease", strictly_dec,
        "f must strictly decrease on the sample grid"))

    with np.errstate(over="ignore"):
        left_vals = np.array([float(f(-10.0 ** k)) for k in range(1, 7)])
    # overflow to +inf counts as divergence; growth must never reverse
    grows = all(b > a or (np.isinf(b) and np.isinf(a))
                for a, b in zip(left_vals, left_vals[1:]))
    diverges = bool(grows and left_vals[-1] > 1e3)
    report.checks.append(CheckResult(
        "divergence_at_minus_inf", diverges,
        f"f(-10^k) k=1..6: {left_vals[[0, -1]]}"))

    pos = s_grid[s_grid >= 0.0]
    if decay_epsilon <= 0.0:
        report.checks.append(CheckResult(
            "polynomial_decay", False,
            f"decay exponent margin eps = {decay_epsilon:.3g} must be positive"))
    else:
        bound = decay_constant * (1.0 + pos) ** (-2.5 - decay_epsilon)
        fp = np.array([float(f(s)) for s in pos])
        ok = bool(np.all(fp <= bound * (1.0 + 1e-12)))
        worst = float(np.max(fp / bound))
        report.checks.append(CheckResult(
            "polynomial_decay", ok, f"max f/bound on s>=0 grid = {worst:.6f}"))
    return report
