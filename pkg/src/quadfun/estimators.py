"""Truncated bilinear estimators and truncation-radius selection.

The inner-product estimator plugs empirical spectral coefficients into the
weighted sum over a finite frequency set Z. Squared-norm estimation splits
one sample into halves (first floor(n/2) points vs the remainder, in given
order) so the two coefficient estimates are independent; squared distances
combine norm and inner-product estimates through the polarization identity,
exactly.

Estimates are reported with their real value plus the tracked imaginary
residual of the complex sum — a free numerical-health diagnostic that is
exactly zero for negation-closed Z.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import (
    ConfigurationError,
    CoverageError,
    EstimationError,
    RateError,
    SolverError,
)
from .frequency import FrequencySet
from .spectral import SampleSet, SpectralProfile, empirical_cf
from .weights import (
    WeightFamily,
    inverse_square_weight,
    pair_kinds_consistent,
    strength_sum,
)


@dataclass(frozen=True)
class EstimateReport:
    """One estimate with its numerical diagnostics."""

    kind: str  # inner_product | norm_sq | distance_sq
    value: float
    imaginary_residual: float
    truncation: int
    term_count: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "imaginary_residual": self.imaginary_residual,
            "truncation": self.truncation,
            "term_count": self.term_count,
        }

    @staticmethod
    def from_dict(d: dict) -> "EstimateReport":
        return EstimateReport(
            kind=d["kind"],
            value=float(d["value"]),
            imaginary_residual=float(d["imaginary_residual"]),
            truncation=int(d["truncation"]),
            term_count=int(d["term_count"]),
        )


def _weighted_bilinear_sum(
    cf_p: SpectralProfile, cf_q: SpectralProfile, a: WeightFamily, Z: FrequencySet
) -> tuple[float, float]:
    """(real, imag) of sum_z cf_p(z) * conj(cf_q(z)) / a_z^2 over Z members.

    Accumulated with fsum in lexicographic member order; absent weights
    (1/a_z^2 = 0) skip the term, missing coefficients at contributing
    frequencies raise CoverageError.
    """
    reals: list[float] = []
    imags: list[float] = []
    for z in Z.members:
        inv = inverse_square_weight(a, z)
        if inv == 0.0:
            continue
        if z not in cf_p or z not in cf_q:
            raise CoverageError(f"profiles do not cover frequency {z}")
        term = cf_p[z] * cf_q[z].conjugate() * inv
        reals.append(term.real)
        imags.append(term.imag)
    return math.fsum(reals), math.fsum(imags)


def inner_product(
    cf_p: SpectralProfile, cf_q: SpectralProfile, a: WeightFamily, Z: FrequencySet
) -> EstimateReport:
    """Weighted bilinear estimate of the semi-inner product over Z."""
    value, resid = _weighted_bilinear_sum(cf_p, cf_q, a, Z)
    return EstimateReport(
        kind="inner_product",
        value=value,
        imaginary_residual=resid,
        truncation=Z.radius,
        term_count=len(Z),
    )


def split_halves(samples: SampleSet) -> tuple[SampleSet, SampleSet]:
    """First floor(n/2) points vs the remainder, in given order (no shuffling)."""
    n = len(samples)
    half = n // 2
    first = SampleSet(samples.dimension, samples.points[:half], label=samples.label)
    second = SampleSet(samples.dimension, samples.points[half:], label=samples.label)
    return first, second


def norm_sq(samples: SampleSet, a: WeightFamily, Z: FrequencySet) -> EstimateReport:
    """Split-sample estimate of the squared seminorm over Z.

    Unbiased for the truncated sum of |coefficient|^2 / a_z^2 because the two
    halves are independent. Requires n >= 2.
    """
    if len(samples) < 2:
        raise EstimationError("need n >= 2 for sample splitting")
    first, second = split_halves(samples)
    cf1 = empirical_cf(first, Z)
    cf2 = empirical_cf(second, Z)
    value, resid = _weighted_bilinear_sum(cf1, cf2, a, Z)
    return EstimateReport(
        kind="norm_sq",
        value=value,
        imaginary_residual=resid,
        truncation=Z.radius,
        term_count=len(Z),
    )


def distance_sq(
    samples_x: SampleSet, samples_y: SampleSet, a: WeightFamily, Z: FrequencySet
) -> EstimateReport:
    """Squared pseudometric estimate: norm(X) + norm(Y) - 2 * inner(X, Y).

    The combination is the exact algebraic identity; the cross term uses the
    full samples (independence holds across the two sets), the norm terms use
    the split rule.
    """
    nx = norm_sq(samples_x, a, Z)
    ny = norm_sq(samples_y, a, Z)
    cf_x = empirical_cf(samples_x, Z)
    cf_y = empirical_cf(samples_y, Z)
    cross = inner_product(cf_x, cf_y, a, Z)
    return EstimateReport(
        kind="distance_sq",
        value=nx.value + ny.value - 2.0 * cross.value,
        imaginary_residual=nx.imaginary_residual
        + ny.imaginary_residual
        - 2.0 * cross.imaginary_residual,
        truncation=Z.radius,
        term_count=len(Z),
    )


# ---------------------------------------------------------------------------
# Truncation-radius selection
# ---------------------------------------------------------------------------

def select_zeta_closed_form(
    a_kind: str, b_kind: str, s: float, t: float, dimension: int, n: int
) -> int:
    """Rate-optimal truncation radius from the closed-form balance per pair.

        sobolev/sobolev          ceil(n^(2/(4t+D)))
        gaussian/gaussian        ceil(sqrt(ln n / (2t)))
        exponential/exponential  ceil(ln n / (2t))
        logarithmic/logarithmic  smallest zeta with zeta^(89D/20) (ln zeta)^(4t+D) >= n
        sinc a with band s       zeta = s, independent of n

    Constant weights count as the zero-parameter member of the partner's
    kind; for consistent cross-kind pairs the balance is driven by the
    smoothness side, so the rule keyed by b's kind applies. Results are
    clamped to >= 1.
    """
    if n < 2:
        raise EstimationError(f"need n >= 2, got {n}")
    if a_kind == "sinc":
        return max(1, int(s))
    if not pair_kinds_consistent(a_kind, s, b_kind, t):
        raise RateError(f"inconsistent pair ({a_kind}, {b_kind}): no finite rate")
    if b_kind == "constant" or t == 0:
        b_kind, t = "sobolev", 0.0
    if b_kind == "sinc":
        return max(1, int(t))
    log_n = math.log(n)
    if b_kind == "sobolev":
        return max(1, math.ceil(n ** (2.0 / (4.0 * t + dimension))))
    if b_kind == "gaussian":
        if t <= 0:
            raise RateError("gaussian rule needs t > 0")
        return max(1, math.ceil(math.sqrt(log_n / (2.0 * t))))
    if b_kind == "exponential":
        if t <= 0:
            raise RateError("exponential rule needs t > 0")
        return max(1, math.ceil(log_n / (2.0 * t)))
    if b_kind == "logarithmic":
        exponent = 89.0 * dimension / 20.0

        def lhs(zeta: int) -> float:
            return zeta**exponent * math.log(zeta) ** (4.0 * t + dimension)

        zeta = 2
        while lhs(zeta) < n:
            zeta *= 2
            if zeta > 10**9:
                raise SolverError("no logarithmic-balance solution below 1e9")
        lo, hi = max(2, zeta // 2), zeta
        while lo < hi:
            mid = (lo + hi) // 2
            if lhs(mid) >= n:
                hi = mid
            else:
                lo = mid + 1
        return max(1, lo)
    raise ConfigurationError(f"no closed-form rule for pair ({a_kind}, {b_kind})")


def select_zeta_lecam(
    b: WeightFamily, n: int, dimension: int, zeta_max: int = 10**6
) -> int:
    """Smallest zeta >= 1 whose cumulative strength satisfies B^2 >= zeta^D n^2.

    This is the implicit balance equation whose solution carries the
    nonparametric rate. The search doubles then bisects; the ratio
    B_zeta^2 / zeta^D is checked for monotonicity along the way, and a
    non-monotone reading triggers a warning plus a linear rescan.
    """
    if n < 1:
        raise EstimationError(f"need n >= 1, got {n}")

    target = float(n) * float(n)
    evaluated: dict[int, float] = {}

    def ratio(zeta: int) -> float:
        if zeta not in evaluated:
            strength = strength_sum(b, zeta, dimension)
            evaluated[zeta] = (
                math.inf
                if math.isinf(strength)
                else strength * strength / float(zeta) ** dimension
            )
        return evaluated[zeta]

    def satisfied(zeta: int) -> bool:
        return ratio(zeta) >= target

    zeta = 1
    while not satisfied(zeta):
        zeta *= 2
        if zeta > zeta_max:
            raise SolverError(f"no solution below zeta_max={zeta_max}")
    lo, hi = max(1, zeta // 2), zeta
    while lo < hi:
        mid = (lo + hi) // 2
        if satisfied(mid):
            hi = mid
        else:
            lo = mid + 1
    result = lo

    path = sorted(evaluated)
    ratios = [evaluated[z] for z in path]
    if any(r2 < r1 for r1, r2 in zip(ratios, ratios[1:])):
        warnings.warn(
            "strength ratio non-monotone along search path; falling back to linear scan",
            RuntimeWarning,
            stacklevel=2,
        )
        for zeta in range(1, zeta_max + 1):
            if satisfied(zeta):
                return zeta
        raise SolverError(f"no solution below zeta_max={zeta_max}")
    return result
