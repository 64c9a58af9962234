"""Monte Carlo convergence studies: MSE-vs-n curves and rate-slope fits.

Replication seeds are derived with a documented 64-bit splitmix-style hash
of (base_seed, n, replication index, stream tag), so adding sample sizes to
a grid never perturbs existing rows and replications may run in any order:

    h = splitmix64(base_seed); for part in (n, rep, stream): h = splitmix64(h ^ part)

with splitmix64(x) = the standard finalizer
    x += 0x9E3779B97F4A7C15; x ^= x >> 30; x *= 0xBF58476D1CE4E5B9;
    x ^= x >> 27; x *= 0x94D049BB133111EB; x ^= x >> 31   (all mod 2^64).

Stream tag 0 seeds the X-sample, tag 1 the Y-sample of a replication. Each
replication is self-contained, and per-n summaries are reduced with fsum in
replication-index order, so serial and parallel execution produce
bit-identical results.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .densities import (
    ReferenceDensity,
    alternating_signs,
    density_to_dict,
    exact_product,
    make_worst_case,
    orthant_strength,
    random_signs,
    sample,
    validate_worst_case,
)
from .errors import ConfigurationError, FitError, NonnegativityViolation, RateError
from .estimators import (
    distance_sq,
    inner_product,
    norm_sq,
    select_zeta_closed_form,
    select_zeta_lecam,
)
from .frequency import lattice_ball
from .spectral import empirical_cf
from .theory import tv_bound
from .weights import WeightFamily, format_weight_spec

_MASK64 = (1 << 64) - 1

ESTIMAND_KINDS = ("inner_product", "norm_sq", "distance_sq")
ZETA_RULES = ("closed_form", "lecam", "fixed")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base_seed: int, n: int, rep: int, stream: int) -> int:
    """Replication seed; see module docstring for the exact mix."""
    h = splitmix64(base_seed & _MASK64)
    for part in (n, rep, stream):
        h = splitmix64(h ^ (part & _MASK64))
    return h


@dataclass(frozen=True)
class ExperimentConfig:
    density_p: ReferenceDensity
    density_q: ReferenceDensity
    a: WeightFamily
    b: WeightFamily | None
    n_grid: tuple[int, ...]
    replications: int
    zeta_rule: str = "fixed"
    fixed_zeta: int | None = None
    base_seed: int = 0
    estimand_kind: str = "inner_product"

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if not self.n_grid or any(
            b <= a for a, b in zip(self.n_grid, self.n_grid[1:])
        ):
            raise ConfigurationError("n_grid must be nonempty and strictly increasing")
        if self.zeta_rule not in ZETA_RULES:
            raise ConfigurationError(f"unknown zeta rule {self.zeta_rule!r}")
        if self.zeta_rule == "fixed" and (self.fixed_zeta is None or self.fixed_zeta < 0):
            raise ConfigurationError("fixed zeta rule requires fixed_zeta >= 0")
        if self.zeta_rule in ("closed_form", "lecam") and self.b is None:
            raise ConfigurationError(f"zeta rule {self.zeta_rule!r} requires b")
        if self.estimand_kind not in ESTIMAND_KINDS:
            raise ConfigurationError(f"unknown estimand kind {self.estimand_kind!r}")
        if self.density_p.dimension != self.density_q.dimension:
            raise ConfigurationError("densities have different dimensions")


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    zeta: int
    truth: float
    mean_estimate: float
    mse: float
    mse_stderr: float


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[ExperimentRow, ...]
    slope: float
    slope_stderr: float
    intercept: float
    single_rep: bool


def _truth(config: ExperimentConfig) -> float:
    p, q, a = config.density_p, config.density_q, config.a
    if config.estimand_kind == "inner_product":
        return exact_product(p, q, a, None)
    if config.estimand_kind == "norm_sq":
        return exact_product(p, p, a, None)
    return (
        exact_product(p, p, a, None)
        + exact_product(q, q, a, None)
        - 2.0 * exact_product(p, q, a, None)
    )


def _zeta_for(config: ExperimentConfig, n: int) -> int:
    if config.zeta_rule == "fixed":
        return int(config.fixed_zeta)
    if config.zeta_rule == "lecam":
        return select_zeta_lecam(config.b, n, config.density_p.dimension)
    a, b = config.a, config.b
    return select_zeta_closed_form(
        a.kind, b.kind, a.param, b.param, config.density_p.dimension, n
    )


def _one_replication(config: ExperimentConfig, Z, n: int, rep: int) -> float:
    kind = config.estimand_kind
    seed_x = derive_seed(config.base_seed, n, rep, 0)
    xs = sample(config.density_p, n, seed_x)
    if kind == "norm_sq":
        return norm_sq(xs, config.a, Z).value
    seed_y = derive_seed(config.base_seed, n, rep, 1)
    ys = sample(config.density_q, n, seed_y)
    if kind == "inner_product":
        return inner_product(
            empirical_cf(xs, Z), empirical_cf(ys, Z), config.a, Z
        ).value
    return distance_sq(xs, ys, config.a, Z).value


def run_mse_study(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """MSE of the configured estimator against the exact functional, per n.

    Deterministic given the config; workers > 1 parallelizes replications
    with an index-ordered merge, so the result is identical either way.
    """
    truth = _truth(config)
    if not math.isfinite(truth):
        raise RateError("exact functional is not finite for this configuration")
    dimension = config.density_p.dimension
    reps = config.replications

    plan = []
    for n in config.n_grid:
        zeta = _zeta_for(config, n)
        Z = lattice_ball(zeta, dimension, config.a.support_rule)
        plan.append((n, zeta, Z))

    jobs = [(i, n, Z, rep) for i, (n, _, Z) in enumerate(plan) for rep in range(reps)]
    estimates = [[0.0] * reps for _ in plan]

    def run_job(job):
        i, n, Z, rep = job
        return i, rep, _one_replication(config, Z, n, rep)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, rep, value in pool.map(run_job, jobs):
                estimates[i][rep] = value
    else:
        for job in jobs:
            i, rep, value = run_job(job)
            estimates[i][rep] = value

    rows = []
    for (n, zeta, _), values in zip(plan, estimates):
        mean_estimate = math.fsum(values) / reps
        sq_errors = [(v - truth) ** 2 for v in values]
        mse = math.fsum(sq_errors) / reps
        if reps > 1:
            var = math.fsum((e - mse) ** 2 for e in sq_errors) / (reps - 1)
            stderr = math.sqrt(var / reps)
        else:
            stderr = 0.0
        rows.append(
            ExperimentRow(
                n=n,
                zeta=zeta,
                truth=truth,
                mean_estimate=mean_estimate,
                mse=mse,
                mse_stderr=stderr,
            )
        )

    if len(rows) >= 2 and all(r.mse > 0 for r in rows):
        slope, stderr, intercept = fit_rate([(r.n, r.mse) for r in rows])
    else:
        slope, stderr, intercept = math.nan, math.nan, math.nan
    return ExperimentResult(
        rows=tuple(rows),
        slope=slope,
        slope_stderr=stderr,
        intercept=intercept,
        single_rep=(reps == 1),
    )


def fit_rate(points) -> tuple[float, float, float]:
    """OLS fit of ln(mse) on ln(n): (slope, slope standard error, intercept).

    The slope standard error is the usual residual-based OLS formula, 0 when
    exactly two points pin the line.
    """
    pts = [(float(n), float(m)) for n, m in points]
    if len(pts) < 2:
        raise FitError("need at least 2 points to fit a rate")
    if any(n <= 0 or m <= 0 for n, m in pts):
        raise FitError("rate fitting needs positive n and mse")
    xs = [math.log(n) for n, _ in pts]
    ys = [math.log(m) for _, m in pts]
    m = len(pts)
    xbar = math.fsum(xs) / m
    ybar = math.fsum(ys) / m
    sxx = math.fsum((x - xbar) ** 2 for x in xs)
    if sxx == 0:
        raise FitError("all n values identical")
    sxy = math.fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    if m == 2:
        return slope, 0.0, intercept
    ssr = math.fsum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    stderr = math.sqrt(ssr / (m - 2) / sxx)
    return slope, stderr, intercept


# ---------------------------------------------------------------------------
# Worst-case family sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WorstCaseRow:
    zeta: int
    valid: bool
    gap: float
    tv: float
    attempts: int
    failures: int
    first_failure: str


def run_worst_case_sweep(
    b: WeightFamily,
    a: WeightFamily,
    dimension: int,
    zeta_grid,
    n: int,
    regime: str = "smooth",
    random_taus: int = 16,
    seed: int = 0,
) -> tuple[WorstCaseRow, ...]:
    """Attempt the perturbation construction across a zeta grid.

    Per zeta: one alternating-sign pattern plus random_taus random patterns;
    a row is valid only if every attempt both constructs (nonnegative) and
    passes all validation claims — the lower-bound argument needs the whole
    sign family. Failures become rows, never exceptions.
    """
    rows = []
    for zeta in (int(z) for z in zeta_grid):
        strength_b = orthant_strength(b, zeta, dimension)
        strength_a = orthant_strength(a, zeta, dimension)
        if regime == "smooth":
            gap = strength_a / strength_b if strength_b > 0 else math.nan
            c = strength_b**-0.5 if strength_b > 0 else math.nan
        else:
            gap = strength_a / float(zeta) ** (2 * dimension)
            c = float(zeta) ** (-dimension)
        tv = tv_bound(n, c, zeta, dimension) if math.isfinite(c) else math.nan

        patterns = [alternating_signs(zeta, dimension)]
        patterns.extend(
            random_signs(zeta, dimension, derive_seed(seed, zeta, k, 2))
            for k in range(random_taus)
        )
        failures = 0
        first_failure = ""
        for signs in patterns:
            try:
                g = make_worst_case(zeta, signs, b, dimension, regime=regime)
            except (NonnegativityViolation, ConfigurationError) as exc:
                failures += 1
                if not first_failure:
                    first_failure = str(exc)
                continue
            report = validate_worst_case(g, b, a, zeta, dimension, regime=regime, n=n)
            if not report.ok:
                failures += 1
                if not first_failure:
                    first_failure = "; ".join(report.failures)
        rows.append(
            WorstCaseRow(
                zeta=zeta,
                valid=failures == 0,
                gap=gap,
                tv=tv,
                attempts=len(patterns),
                failures=failures,
                first_failure=first_failure,
            )
        )
    return tuple(rows)


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------

STUDY_CSV_HEADER = ["n", "zeta", "truth", "mean_estimate", "mse", "mse_stderr"]


def write_study_csv(result: ExperimentResult, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(STUDY_CSV_HEADER)
        for r in result.rows:
            writer.writerow(
                [r.n, r.zeta, repr(r.truth), repr(r.mean_estimate), repr(r.mse), repr(r.mse_stderr)]
            )


def config_echo(config: ExperimentConfig) -> dict:
    return {
        "density_p": density_to_dict(config.density_p),
        "density_q": density_to_dict(config.density_q),
        "a": format_weight_spec(config.a),
        "b": format_weight_spec(config.b) if config.b is not None else None,
        "n_grid": list(config.n_grid),
        "replications": config.replications,
        "zeta_rule": config.zeta_rule,
        "fixed_zeta": config.fixed_zeta,
        "base_seed": config.base_seed,
        "estimand_kind": config.estimand_kind,
    }


def write_study_sidecar(
    result: ExperimentResult, config: ExperimentConfig, path: str
) -> None:
    payload = {
        "config": config_echo(config),
        "fitted": {
            "slope": result.slope,
            "slope_stderr": result.slope_stderr,
            "intercept": result.intercept,
        },
        "single_rep": result.single_rep,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
