"""Point estimates with 95% intervals."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

Z95 = float(stats.norm.ppf(0.975))
KURTOSIS_WARN = 10.0


class HeavyTailWarning(UserWarning):
    """Sample kurtosis is large enough that a normal interval for the mean is suspect."""


@dataclass(frozen=True)
class Estimate:
    estimate: float
    stderr: float
    ci_lo: float
    ci_hi: float
    n: int

    def contains(self, value: float) -> bool:
        return self.ci_lo <= value <= self.ci_hi

    def within_sigma(self, value: float, k: float = 3.0) -> bool:
        return abs(self.estimate - value) <= k * self.stderr


@dataclass(frozen=True)
class MeanSummary(Estimate):
    median: float = math.nan
    p0: float = math.nan
    kurtosis: float = math.nan

    @property
    def heavy_tailed(self) -> bool:
        return self.kurtosis > KURTOSIS_WARN


def wilson(successes: int, trials: int, z: float = Z95) -> Estimate:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # rounding can push the point a hair outside at phat in {0, 1}
    lo, hi = min(centre - half, phat), max(centre + half, phat)
    return Estimate(phat, math.sqrt(phat * (1 - phat) / trials), max(lo, 0.0), min(hi, 1.0), trials)


def mean_interval(samples, z: float = Z95, warn: bool = True) -> MeanSummary:
    """Normal-approximation interval for a mean, with median and P(value = 0)."""
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("need at least one sample")
    mean = float(x.mean())
    sd = float(x.std(ddof=1)) if n > 1 else 0.0
    se = sd / math.sqrt(n)
    kurt = float(stats.kurtosis(x, fisher=False)) if sd > 0 else math.nan
    if warn and kurt > KURTOSIS_WARN:
        warnings.warn(f"sample kurtosis {kurt:.3g} > {KURTOSIS_WARN:g}: "
                      "the normal interval for the mean may be unreliable",
                      HeavyTailWarning, stacklevel=2)
    return MeanSummary(mean, se, mean - z * se, mean + z * se, n,
                       median=float(np.median(x)), p0=float(np.mean(x == 0)), kurtosis=kurt)


def chi_square_pvalue(observed, expected_probs, min_expected: float = 5.0) -> float:
    """Goodness-of-fit p-value; sparse cells are pooled into a single bin."""
    observed = np.asarray(observed, dtype=np.float64)
    probs = np.asarray(expected_probs, dtype=np.float64)
    total = observed.sum()
    expected = probs / probs.sum() * total
    keep = expected >= min_expected
    obs = list(observed[keep])
    exp = list(expected[keep])
    if not keep.all():
        rest_obs, rest_exp = observed[~keep].sum(), expected[~keep].sum()
        if rest_exp > 0:
            obs.append(rest_obs)
            exp.append(rest_exp)
        elif rest_obs > 0:
            return 0.0                          # mass where the law puts none
    if len(obs) < 2:
        return 1.0
    exp = np.asarray(exp) * (sum(obs) / sum(exp))
    return float(stats.chisquare(obs, exp).pvalue)
