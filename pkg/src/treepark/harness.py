"""Monte Carlo estimators, reproducible sweeps and CSV output.

Trials are split into fixed-size blocks.  Block ``b`` draws from
``default_rng(SeedSequence(seed, spawn_key=(b,)))``, so the per-trial outcomes,
and hence every reported number, depend only on (seed, trials) and not on how
many worker threads ran the blocks.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import MISSING, asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import InvalidArgument, ValidationError
from .laws import Law, Poisson, arrival_family, parse_law
from .oracle import binary_root_visits, rde_fixed_point
from .stats import MeanSummary, mean_interval, wilson
from .trees import DEFAULT_MAX_VERTICES, size_biased_law

log = logging.getLogger(__name__)

BLOCK_SIZE = 256
DEFAULT_BUSH_DEPTH = 32
DEFAULT_BUSH_CAP = 10 ** 6
CSV_COLUMNS = ("estimator", "alpha", "size", "trials", "estimate", "stderr",
               "ci_lo", "ci_hi", "excluded", "seed", "wall_millis")
ENSEMBLES = ("cayley", "gw", "spine", "binary")


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))


def run_blocks(fn: Callable[[np.random.Generator, int], tuple], trials: int, seed: int,
               jobs: int = 1, block_size: int = BLOCK_SIZE) -> tuple:
    """Run ``fn(rng, count)`` over blocks of trials and concatenate its arrays in block order."""
    if int(trials) != trials or trials < 1:
        raise InvalidArgument("trials must be a positive integer")
    sizes = [min(block_size, trials - start) for start in range(0, int(trials), block_size)]

    def one(b):
        return fn(block_rng(seed, b), sizes[b])

    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(b) for b in range(len(sizes))]
    return tuple(np.concatenate(cols) for cols in zip(*parts))


@dataclass(frozen=True)
class EstimateRecord:
    estimator: str
    alpha: float
    size: int
    trials: int
    estimate: float
    stderr: float
    ci_lo: float
    ci_hi: float
    excluded: int
    seed: int
    wall_millis: int = 0
    summary: MeanSummary | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.ci_lo <= self.estimate <= self.ci_hi:
            raise ValueError("interval must contain the point estimate")
        if not 0 <= self.excluded <= self.trials:
            raise ValueError("excluded count out of range")

    def row(self) -> list[str]:
        return [_fmt(getattr(self, name)) for name in CSV_COLUMNS]

    def as_dict(self) -> dict:
        out = {name: getattr(self, name) for name in CSV_COLUMNS}
        if self.summary is not None:
            out.update(median=self.summary.median, p0=self.summary.p0,
                       kurtosis=self.summary.kurtosis)
        return out


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def records_to_csv(records: Sequence[EstimateRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_csv(records: Sequence[EstimateRecord], path) -> None:
    write_atomic(path, records_to_csv(records))


class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.start = time.perf_counter()

    def millis(self) -> int:
        return int(round(1000 * (time.perf_counter() - self.start))) if self.enabled else 0


def _proportion_record(name, alpha, size, successes, kept, excluded, seed, clock) -> EstimateRecord:
    est = wilson(int(successes), int(kept))
    return EstimateRecord(name, float(alpha), int(size), int(kept + excluded), est.estimate,
                          est.stderr, est.ci_lo, est.ci_hi, int(excluded), int(seed),
                          clock.millis())


def _mean_record(name, alpha, size, samples, excluded, seed, clock, warn=True) -> EstimateRecord:
    s = mean_interval(samples, warn=warn)
    return EstimateRecord(name, float(alpha), int(size), int(samples.size + excluded), s.estimate,
                          s.stderr, s.ci_lo, s.ci_hi, int(excluded), int(seed), clock.millis(),
                          summary=s)


def car_count(n: int, alpha: float) -> int:
    """m = floor(alpha n), with alpha read as the decimal it was written as."""
    return math.floor(Fraction(repr(float(alpha))) * int(n))


# ---------------------------------------------------------------- estimators


def cayley_root_visits(n: int, alpha: float, trials: int, seed: int, *,
                       arrivals: str = "multinomial", jobs: int = 1) -> np.ndarray:
    if int(n) != n or n < 1:
        raise InvalidArgument("n must be a positive integer")
    if arrivals == "multinomial":
        m, table = car_count(n, alpha), np.ones(1)
    else:
        m, table = -1, arrival_family(arrivals, alpha).sampling_cdf()

    def block(rng, count):
        chi = np.empty(count, np.int64)
        _kernels.cayley_trials(rng, int(n), m, table, chi)
        return (chi,)

    return run_blocks(block, trials, seed, jobs)[0]


def estimate_parking_prob_cayley(n: int, alpha: float, trials: int, seed: int, *,
                                 arrivals: str = "multinomial", jobs: int = 1,
                                 record_timing: bool = False) -> EstimateRecord:
    """P(all cars park) on a uniform rooted tree with floor(alpha n) uniform cars
    (or i.i.d. arrivals of the named family)."""
    if not 0 <= alpha < 1:
        raise InvalidArgument("alpha must lie in [0, 1)")
    clock = _Clock(record_timing)
    if arrivals != "multinomial" and alpha == 0:
        chi = np.zeros(int(trials), np.int64)
    else:
        chi = cayley_root_visits(n, alpha, trials, seed, arrivals=arrivals, jobs=jobs)
    name = "cayley" if arrivals == "multinomial" else f"cayley-{arrivals}"
    return _proportion_record(name, alpha, n, np.count_nonzero(chi <= 1), chi.size, 0, seed, clock)


def gw_root_visits(offspring: Law, arrival: Law, max_vertices: int, trials: int, seed: int,
                   jobs: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Root visits and truncation flags over independent Galton-Watson trials."""
    if int(max_vertices) != max_vertices or max_vertices < 1:
        raise InvalidArgument("max_vertices must be a positive integer")
    cdf_off, cdf_arr = offspring.sampling_cdf(), arrival.sampling_cdf()

    def block(rng, count):
        chi = np.empty(count, np.int64)
        trunc = np.empty(count, np.bool_)
        _kernels.gw_trials(rng, cdf_off, cdf_arr, int(max_vertices), chi, trunc)
        return chi, trunc

    return run_blocks(block, trials, seed, jobs)


def estimate_mean_root_visits_gw(offspring: Law, arrival: Law, trials: int, seed: int, *,
                                 max_vertices: int = DEFAULT_MAX_VERTICES, jobs: int = 1,
                                 record_timing: bool = False, warn: bool = True) -> EstimateRecord:
    """Mean root visits on Galton-Watson trees; truncated trees are excluded and counted.

    ``summary`` on the returned record carries median, P(chi = 0) and kurtosis.
    """
    clock = _Clock(record_timing)
    chi, trunc = gw_root_visits(offspring, arrival, max_vertices, trials, seed, jobs)
    kept = chi[~trunc]
    if kept.size == 0:
        raise InvalidArgument("every trial hit max_vertices; raise the cap")
    return _mean_record("gw", arrival.mean, max_vertices, kept, int(trunc.sum()), seed, clock, warn)


def spine_outcomes(arrival: Law, spine_len: int, trials: int, seed: int, *,
                   offspring: Law = Poisson(1.0), bush_depth: int = DEFAULT_BUSH_DEPTH,
                   bush_cap: int = DEFAULT_BUSH_CAP, jobs: int = 1):
    """Success flags (C_n >= 0 for all n <= L) and truncated-bush counts per trial."""
    if int(spine_len) != spine_len or spine_len < 1:
        raise InvalidArgument("spine length must be a positive integer")
    cdf_hat = size_biased_law(offspring).sampling_cdf()
    cdf_off, cdf_arr = offspring.sampling_cdf(), arrival.sampling_cdf()

    def block(rng, count):
        ok = np.empty(count, np.bool_)
        trunc = np.empty(count, np.int64)
        _kernels.spine_trials(rng, int(spine_len), cdf_hat, cdf_off, cdf_arr,
                              int(bush_depth), int(bush_cap), ok, trunc)
        return ok, trunc

    return run_blocks(block, trials, seed, jobs)


def estimate_parking_prob_spine(alpha: float, spine_len: int, trials: int, seed: int, *,
                                offspring: Law = Poisson(1.0), arrivals: str = "poisson",
                                bush_depth: int = DEFAULT_BUSH_DEPTH,
                                bush_cap: int = DEFAULT_BUSH_CAP, jobs: int = 1,
                                record_timing: bool = False) -> EstimateRecord:
    """P(no parking failure on the first L spine vertices) for the size-biased tree.

    Bushes hanging off the spine are cut ``bush_depth`` levels below it.  Trials
    in which some bush reached ``bush_cap`` vertices are excluded and counted.
    """
    if not 0 < alpha < 1:
        raise InvalidArgument("alpha must lie in (0, 1)")
    clock = _Clock(record_timing)
    ok, trunc = spine_outcomes(arrival_family(arrivals, alpha), spine_len, trials, seed,
                               offspring=offspring, bush_depth=bush_depth,
                               bush_cap=bush_cap, jobs=jobs)
    keep = trunc == 0
    return _proportion_record("spine", alpha, spine_len, np.count_nonzero(ok & keep),
                              int(keep.sum()), int((~keep).sum()), seed, clock)


def estimate_parking_prob_walk(alpha: float, horizon: int, trials: int, seed: int, *,
                               jobs: int = 1, record_timing: bool = False) -> EstimateRecord:
    """Spine parking probability from the skip-free walk driven by the fixed-point law."""
    clock = _Clock(record_timing)
    table = rde_fixed_point(Poisson(alpha), Poisson(1.0)).pmf.sampling_cdf()

    def block(rng, count):
        ok = np.empty(count, np.bool_)
        _kernels.walk_trials(rng, table, int(horizon), ok)
        return (ok,)

    ok = run_blocks(block, trials, seed, jobs)[0]
    return _proportion_record("walk", alpha, horizon, int(ok.sum()), ok.size, 0, seed, clock)


def estimate_binary_root_visits(depths, alpha: float, trials: int, seed: int, *,
                                jobs: int = 1, record_timing: bool = False) -> list[EstimateRecord]:
    """Mean root visits on complete binary trees with paired arrivals, one record per depth.

    All depths share the arrival field of each trial.
    """
    clock = _Clock(record_timing)
    depths = [int(d) for d in np.atleast_1d(depths)]

    def block(rng, count):
        return (binary_root_visits(depths, alpha, count, rng),)

    samples = run_blocks(block, trials, seed, jobs, block_size=16)[0]
    return [_mean_record("binary", alpha, d, samples[:, j], 0, seed, clock, warn=False)
            for j, d in enumerate(depths)]


# ---------------------------------------------------------------- sweeps


@dataclass
class ExperimentConfig:
    """Flat description of a sweep over arrival densities."""

    ensemble: str
    alpha_grid: list
    trials: int
    seed: int
    size: int
    offspring: str = "poisson:1"
    arrival: str = "poisson"
    arrivals_mode: str = "iid"
    output_path: str | None = None
    jobs: int = 1
    bush_depth: int = DEFAULT_BUSH_DEPTH
    record_timing: bool = False

    def violations(self) -> list[str]:
        problems = []
        if self.ensemble not in ENSEMBLES:
            problems.append(f"ensemble must be one of {', '.join(ENSEMBLES)}, got {self.ensemble!r}")
        grid = self.alpha_grid if isinstance(self.alpha_grid, list) else None
        if not grid:
            problems.append("alpha_grid must be a non-empty list")
        if not isinstance(self.trials, int) or self.trials < 1:
            problems.append("trials must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            problems.append("seed must be an integer in [0, 2^64)")
        if not isinstance(self.size, int) or self.size < 0:
            problems.append("size must be a non-negative integer")
        elif self.ensemble in ("cayley", "gw", "spine") and self.size < 1:
            problems.append("size must be at least 1")
        elif self.ensemble == "binary" and self.size > 26:
            problems.append("binary depth must be at most 26")
        if self.arrivals_mode not in ("iid", "multinomial"):
            problems.append("arrivals_mode must be 'iid' or 'multinomial'")
        elif self.arrivals_mode == "multinomial" and self.ensemble != "cayley":
            problems.append("multinomial arrivals are only defined for the cayley ensemble")
        if self.arrival not in ("poisson", "twopoint"):
            problems.append("arrival must be 'poisson' or 'twopoint'")
        if self.ensemble == "binary" and self.arrival != "twopoint":
            problems.append("the binary ensemble uses twopoint arrivals")
        try:
            parse_law(self.offspring)
        except InvalidArgument as exc:
            problems.append(f"offspring: {exc}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            problems.append("jobs must be a positive integer")
        for a in grid or []:
            if not isinstance(a, (int, float)) or isinstance(a, bool):
                problems.append(f"alpha {a!r} is not a number")
                continue
            upper = 2.0 if self.arrival == "twopoint" else (1.0 if self.ensemble in ("cayley", "spine") else math.inf)
            lower_ok = a >= 0 if self.ensemble == "cayley" and self.arrivals_mode == "multinomial" else a > 0
            if not lower_ok or not a < upper:
                problems.append(f"alpha {a!r} outside the valid range for this model")
        return problems

    def validate(self) -> ExperimentConfig:
        problems = self.violations()
        if problems:
            raise ValidationError(problems)
        return self

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        required = [f.name for f in fields(cls)
                    if f.default is MISSING and f.default_factory is MISSING]
        missing = [name for name in required if name not in data]
        problems = [f"unknown key {k!r}" for k in unknown] + [f"missing key {k!r}" for k in missing]
        if problems:
            raise ValidationError(problems)
        return cls(**data)

    @classmethod
    def from_json(cls, path, overrides: dict | None = None) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError([f"{path}: invalid JSON ({exc})"]) from exc
        if not isinstance(data, dict):
            raise ValidationError([f"{path}: expected a JSON object"])
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _estimate_point(cfg: ExperimentConfig, alpha: float) -> EstimateRecord:
    common = dict(jobs=cfg.jobs, record_timing=cfg.record_timing)
    if cfg.ensemble == "cayley":
        mode = "multinomial" if cfg.arrivals_mode == "multinomial" else cfg.arrival
        return estimate_parking_prob_cayley(cfg.size, alpha, cfg.trials, cfg.seed,
                                            arrivals=mode, **common)
    if cfg.ensemble == "gw":
        return estimate_mean_root_visits_gw(parse_law(cfg.offspring), arrival_family(cfg.arrival, alpha),
                                            cfg.trials, cfg.seed, max_vertices=cfg.size,
                                            warn=False, **common)
    if cfg.ensemble == "spine":
        return estimate_parking_prob_spine(alpha, cfg.size, cfg.trials, cfg.seed,
                                           offspring=parse_law(cfg.offspring), arrivals=cfg.arrival,
                                           bush_depth=cfg.bush_depth, **common)
    return estimate_binary_root_visits([cfg.size], alpha, cfg.trials, cfg.seed, **common)[0]


def run_sweep(config: ExperimentConfig) -> list[EstimateRecord]:
    """One record per grid point; writes the CSV atomically when an output path is set."""
    config.validate()
    records = []
    for alpha in config.alpha_grid:
        rec = _estimate_point(config, float(alpha))
        log.info("%s alpha=%g size=%d estimate=%.6g [%.6g, %.6g]", rec.estimator, rec.alpha,
                 rec.size, rec.estimate, rec.ci_lo, rec.ci_hi)
        records.append(rec)
    if config.output_path:
        write_csv(records, config.output_path)
    return records
