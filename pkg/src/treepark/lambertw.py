"""The two real branches of the Lambert W function.

``W0`` maps [-1/e, inf) onto [-1, inf) and ``W-1`` maps [-1/e, 0) onto
(-inf, -1].  On negative arguments both branches are solved in log form,
``w + log(-w) = log(-x)``, so callers that already hold ``log(-x)`` (possibly
far below the float range of ``x`` itself) lose nothing to underflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NumericalFailure

INV_E = math.exp(-1.0)
# Arguments this far below -1/e are treated as rounding noise and clamped.
BRANCH_CLAMP = 1e-12
# Offsets e*x + 1 at the level of one rounding error of x are read as the
# branch point itself; the residual w e^w - x stays at rounding level.
BRANCH_SNAP = 2.0 ** -52
MAX_ITER = 50
REL_TOL = 1e-15


@dataclass(frozen=True)
class BranchValue:
    value: float
    branch: int

    def __post_init__(self):
        if self.branch not in (0, -1):
            raise DomainError(f"branch must be 0 or -1, got {self.branch!r}")
        if self.branch == -1 and not self.value <= -1.0:
            raise NumericalFailure(f"W-1 value {self.value!r} above -1")
        if self.branch == 0 and not self.value >= -1.0:
            raise NumericalFailure(f"W0 value {self.value!r} below -1")


def _branch_offset(log_minus_x: float) -> float:
    """delta = e*x + 1 for x = -exp(log_minus_x), clamped at the branch point.

    Raises when x sits below -1/e by more than BRANCH_CLAMP.
    """
    delta = -math.expm1(log_minus_x + 1.0)
    if delta < 0.0:
        if -delta * INV_E > BRANCH_CLAMP:
            x = -math.exp(log_minus_x)
            raise DomainError(f"argument {x!r} lies below the branch point -1/e")
        return 0.0
    return delta


def _solve_log_form(ell: float, w: float, branch: int) -> float:
    # Halley on F(w) = w + log(-w) - ell; F' = (w + 1)/w, F'' = -1/w^2.
    for _ in range(MAX_ITER):
        f = w + math.log(-w) - ell
        d1 = (w + 1.0) / w
        if d1 == 0.0:
            return w
        d2 = -1.0 / (w * w)
        step = f / (d1 - 0.5 * f * d2 / d1)
        w_new = w - step
        # keep iterates inside the branch
        if branch == -1 and w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        elif branch == 0 and not -1.0 <= w_new < 0.0:
            w_new = 0.5 * (w + (-1.0 if w_new < -1.0 else 0.0))
        if abs(w_new - w) <= REL_TOL * abs(w_new):
            return w_new
        w = w_new
    return w


def _negative(ell: float, branch: int) -> float:
    """W_branch(-exp(ell)) for ell <= -1 (up to clamping)."""
    delta = _branch_offset(ell)
    if delta <= BRANCH_SNAP:
        return -1.0
    p = math.sqrt(2.0 * delta)
    sign = 1.0 if branch == 0 else -1.0
    series = -1.0 + sign * p - p * p / 3.0 + sign * 11.0 / 72.0 * p ** 3
    if delta < 1e-10:
        return series
    if branch == 0:
        if delta >= 0.5:
            return _w0_direct(-math.exp(ell))
        w = series
    elif delta < 0.5:
        w = series
    else:
        w = min(ell - math.log(-ell), -1.0 - 1e-3)
    return _solve_log_form(ell, w, branch)


def _w0_direct(x: float) -> float:
    # away from the branch point: Halley on w e^w - x
    if abs(x) < 0.3:
        w = x - x * x + 1.5 * x ** 3
    else:
        lx = math.log(x)
        w = lx - math.log(lx) if lx > 1.0 else 0.5 * lx + 0.3
    for _ in range(MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if abs(w_new - w) <= REL_TOL * max(abs(w_new), 1e-300):
            return w_new
        w = w_new
    return w


def lambert_w0(x: float) -> float:
    """Principal branch W0(x) for x >= -1/e."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("W0 of NaN")
    if x == 0.0:
        return 0.0
    if x > 0.0:
        if math.isinf(x):
            return math.inf
        return _w0_direct(x)
    return _negative(math.log(-x), 0)


def lambert_wm1(x: float) -> float:
    """Lower branch W-1(x) for -1/e <= x < 0."""
    x = float(x)
    if not x < 0.0:
        raise DomainError(f"W-1 needs a negative argument, got {x!r}")
    return _negative(math.log(-x), -1)


def lambert_w_neglog(ell: float, branch: int) -> float:
    """W_branch(-exp(ell)) computed without forming the argument itself."""
    if branch not in (0, -1):
        raise DomainError(f"branch must be 0 or -1, got {branch!r}")
    if math.isnan(ell):
        raise DomainError("log argument is NaN")
    if ell == -math.inf:
        return 0.0 if branch == 0 else -math.inf
    return _negative(float(ell), branch)


def lambert_w(x: float, branch: int = 0) -> BranchValue:
    if branch == 0:
        return BranchValue(lambert_w0(x), 0)
    if branch == -1:
        return BranchValue(lambert_wm1(x), -1)
    raise DomainError(f"branch must be 0 or -1, got {branch!r}")
