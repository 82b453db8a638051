"""Closed-form results for parking on the critical Poisson Galton-Watson tree.

With Poisson(1) offspring and Poisson(alpha) arrivals, the root-visit count X
has generating function G(s) = -s W_i(h_p(s)), where

    g_p(s) = alpha s - alpha - 1 + (1 - 1/s) p,    h_p(s) = -exp(g_p(s)) / s,

and p = P(X = 0).  Below alpha = 1/2 the lower branch is used throughout and
p = 1 - alpha.  Above it, p solves a scalar equation and the branch switches
from W-1 to W0 at s' = (1 - sqrt(1 - 4 p alpha)) / (2 alpha).

Infinite expectations are reported as ``math.inf`` (exported as ``INFINITE``),
chosen explicitly rather than produced by overflow.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, NumericalFailure, SingularityError
from .lambertw import (BranchValue, lambert_w, lambert_w0, lambert_w_neglog,
                       lambert_wm1)

__all__ = [
    "INFINITE", "BranchValue", "lambert_w", "lambert_w0", "lambert_wm1",
    "g_p", "h_p", "h_p_prime", "solve_p", "Regime", "Pgf", "make_pgf", "pgf",
    "functional_equation_residual", "pgf_derivative", "mean_X",
    "parking_prob_limit", "jones_alpha_c", "jones_mean_X",
    "conditioned_mean_threshold", "conjecture_mean_X", "conjecture_alpha_c",
    "CriticalPoint", "supercritical_mean", "table_rows", "jones_table_rows",
]

INFINITE = math.inf

SCAN_INTERVALS = 64
SCAN_MARGIN = 1e-12
# a discriminant this close below zero is rounding at alpha = alpha_c
DISC_ROUNDING = 1e-14


def _check_s(s: float):
    if not s > 0:
        raise DomainError(f"s must be positive, got {s!r}")


def g_p(s: float, alpha: float, p: float) -> float:
    _check_s(s)
    return math.fsum((alpha * s, -alpha, -1.0, (1.0 - 1.0 / s) * p))


def h_p(s: float, alpha: float, p: float) -> float:
    _check_s(s)
    return -math.exp(g_p(s, alpha, p)) / s


def h_p_prime(s: float, alpha: float, p: float) -> float:
    _check_s(s)
    return math.exp(g_p(s, alpha, p)) * (s ** -2 - (alpha + p / (s * s)) / s)


def _log_minus_h(s: float, alpha: float, p: float) -> float:
    """log(-h_p(s)) = g_p(s) - log s, accurate even when h_p underflows."""
    if s == 1.0:
        return -1.0
    log_s = math.log1p(s - 1.0) if s > 0.5 else math.log(s)
    return math.fsum((alpha * s, -alpha, -1.0, p, -p / s, -log_s))


def _residual(p: float, alpha: float) -> float:
    s = _switch_point(p, alpha)
    return math.exp(alpha * s - alpha + (1.0 - 1.0 / s) * p) / s - 1.0


def _switch_point(p: float, alpha: float) -> float:
    disc = max(1.0 - 4.0 * p * alpha, 0.0)
    # 2p / (1 + sqrt(disc)) equals (1 - sqrt(disc)) / (2 alpha) without cancellation
    return 2.0 * p / (1.0 + math.sqrt(disc))


@lru_cache(maxsize=256)
def solve_p(alpha: float) -> tuple[float, float]:
    """P(X = 0) and the branch switch point s' in the supercritical phase.

    Scans (1 - alpha, 1/(4 alpha)) for sign changes of the residual, then
    bisects to machine precision.  Of the final bracket, the endpoint with a
    non-negative residual is returned: there h_p(s') sits on or a rounding
    error below -1/e, so both branches evaluate to the branch point at s'.
    """
    alpha = float(alpha)
    if not alpha > 0.5 or not math.isfinite(alpha):
        raise DomainError(f"solve_p needs alpha > 1/2, got {alpha!r}")
    lo, hi = 1.0 - alpha + SCAN_MARGIN, 0.25 / alpha - SCAN_MARGIN
    if not lo < hi:
        raise NumericalFailure(f"empty search interval for p at alpha={alpha!r}")
    grid = np.linspace(lo, hi, SCAN_INTERVALS + 1).tolist()
    values = [_residual(p, alpha) for p in grid]
    brackets = [(grid[i], grid[i + 1]) for i in range(SCAN_INTERVALS)
                if values[i] == 0.0 or values[i] * values[i + 1] < 0.0]
    if not brackets:
        raise NumericalFailure(
            f"no sign change of the p-residual on ({lo:.12g}, {hi:.12g}) at alpha={alpha!r}")
    if len(brackets) > 1:
        found = ", ".join(f"({a:.12g}, {b:.12g})" for a, b in brackets)
        raise NumericalFailure(f"several candidate roots for p at alpha={alpha!r}: {found}")
    a, b = brackets[0]
    ra = _residual(a, alpha)
    while True:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        rm = _residual(mid, alpha)
        if rm == 0.0:
            a = b = mid
            break
        if (rm > 0) == (ra > 0):
            a, ra = mid, rm
        else:
            b = mid
    p = a if ra >= 0.0 else b
    return p, _switch_point(p, alpha)


class Regime(enum.Enum):
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class Pgf:
    """Generating function of X for a fixed arrival mean."""

    alpha: float
    p: float
    s_prime: float
    regime: Regime

    def branch_at(self, s: float) -> int:
        return -1 if s <= self.s_prime else 0

    def on_branch(self, s: float, branch: int) -> float:
        """f_i(s) = -s W_i(h_p(s)) on a chosen branch."""
        if not 0 < s <= 1:
            raise DomainError(f"s must lie in (0, 1], got {s!r}")
        ell = _log_minus_h(s, self.alpha, self.p)
        try:
            w = lambert_w_neglog(ell, branch)
        except DomainError as exc:
            raise NumericalFailure(f"Lambert argument out of range at s={s!r}: {exc}") from exc
        return -s * w

    def __call__(self, s: float) -> float:
        return self.on_branch(s, self.branch_at(s))

    def derivative(self, s: float) -> float:
        return pgf_derivative(s, self.alpha, self.p, self(s))


@lru_cache(maxsize=256)
def make_pgf(alpha: float) -> Pgf:
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if alpha <= 0.5:
        return Pgf(alpha, 1.0 - alpha, 1.0, Regime.SUBCRITICAL)
    p, s_prime = solve_p(alpha)
    return Pgf(alpha, p, s_prime, Regime.SUPERCRITICAL)


def pgf(s: float, alpha: float) -> float:
    return make_pgf(alpha)(s)


def functional_equation_residual(s: float, alpha: float, p: float, G_val: float) -> float:
    """G - exp(G/s + alpha s - alpha - 1 + (1 - 1/s) p), zero for the true PGF."""
    return G_val - math.exp(math.fsum((G_val / s, alpha * s, -alpha, -1.0, (1.0 - 1.0 / s) * p)))


def pgf_derivative(s: float, alpha: float, p: float, G_val: float) -> float:
    """G'(s) = (alpha s^2 + p - G) G / (s (s - G))."""
    if abs(s - G_val) < 1e-14:
        raise SingularityError(f"derivative formula is singular at s = G(s) = {s!r}")
    return (alpha * s * s + p - G_val) * G_val / (s * (s - G_val))


def mean_X(alpha: float) -> float:
    """E X = 1 - sqrt(1 - 2 alpha) up to alpha = 1/2, infinite beyond."""
    if not 0 <= alpha < 1:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha!r}")
    if alpha > 0.5:
        return INFINITE
    return 1.0 - math.sqrt(1.0 - 2.0 * alpha)


def parking_prob_limit(alpha: float) -> float:
    """Limiting probability that all cars park: sqrt(1 - 2 alpha) / (1 - alpha)."""
    if not 0 <= alpha < 1:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha!r}")
    if alpha >= 0.5:
        return 0.0
    return math.sqrt(1.0 - 2.0 * alpha) / (1.0 - alpha)


# ---------------------------------------------------------------- other models


def _check_beta(beta: float):
    if not 0 < beta <= 0.25:
        raise DomainError(f"beta must lie in (0, 1/4], got {beta!r}")


def jones_alpha_c(beta: float) -> float:
    """Critical density for Binary(beta) offspring with paired arrivals."""
    _check_beta(beta)
    return 1.0 + beta - math.sqrt(beta * (2.0 + beta))


def jones_mean_X(alpha: float, beta: float) -> float:
    _check_beta(beta)
    if not 0 < alpha < 2:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha!r}")
    if alpha > jones_alpha_c(beta):
        return INFINITE
    radicand = max(1.0 - 2.0 * alpha * (1.0 - alpha / 2.0 + beta), 0.0)
    return (1.0 - alpha + 2.0 * alpha * beta - math.sqrt(radicand)) / (2.0 * beta)


def conditioned_mean_threshold(mean_P: float, var_N: float) -> float:
    """Bound on E X below which the conditioned tree has finite mean root visits."""
    if not var_N > 0:
        raise DomainError(f"var_N must be positive, got {var_N!r}")
    return (mean_P * var_N + 1.0 - mean_P) / var_N


def conjecture_mean_X(alpha: float, var_N: float, h_alpha: float) -> float:
    """Conjectured E X for critical offspring: the smaller root of the quadratic.

    ``h_alpha`` is E[P(P - 1)].  Infinite once the discriminant turns negative
    (or alpha exceeds 1, past which the finite branch cannot be reached).
    """
    if not 0 < var_N <= 1:
        raise DomainError(f"var_N must lie in (0, 1], got {var_N!r}")
    if h_alpha < 0 or alpha < 0:
        raise DomainError("alpha and h(alpha) must be non-negative")
    disc = (1.0 - alpha) ** 2 - var_N * h_alpha
    if alpha > 1 or disc < -DISC_ROUNDING:
        return INFINITE
    disc = max(disc, 0.0)
    return (1.0 - alpha + alpha * var_N - math.sqrt(disc)) / var_N


class CriticalPoint(NamedTuple):
    alpha_c: float
    has_transition: bool


def conjecture_alpha_c(var_N: float, h: Callable[[float], float], tol: float = 1e-13) -> CriticalPoint:
    """Solve alpha = 1 - sqrt(var_N h(alpha)) on [0, 1] by bisection."""
    if not 0 < var_N <= 1:
        raise DomainError(f"var_N must lie in (0, 1], got {var_N!r}")

    def phi(a):
        return a - 1.0 + math.sqrt(var_N * h(a))

    if phi(1.0) <= 0.0:
        return CriticalPoint(1.0, False)
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if phi(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return CriticalPoint(0.5 * (lo + hi), True)


def supercritical_mean(lam: float, alpha: float, p_lambda: float) -> float:
    """E X = (lambda - alpha - lambda p) / (lambda - 1) for supercritical offspring."""
    if not lam > 1:
        raise DomainError(f"lambda must exceed 1, got {lam!r}")
    if not 0 <= p_lambda <= 1:
        raise DomainError(f"p must lie in [0, 1], got {p_lambda!r}")
    return (lam - alpha - lam * p_lambda) / (lam - 1.0)


# ---------------------------------------------------------------- tables


def table_rows(alphas) -> list[dict]:
    rows = []
    for a in alphas:
        g = make_pgf(a)
        rows.append({"alpha": a, "p": g.p, "s_prime": g.s_prime,
                     "mean_X": mean_X(a), "parking_prob": parking_prob_limit(a)})
    return rows


def jones_table_rows(alphas, beta: float) -> list[dict]:
    rows = []
    a_c = jones_alpha_c(beta)
    for a in alphas:
        rows.append({"alpha": a, "beta": beta, "alpha_c": a_c,
                     "mean_X": jones_mean_X(a, beta),
                     "conditioned_threshold": conditioned_mean_threshold(a, 2.0 * beta)})
    return rows
