"""Reference densities on the torus with exactly known spectra.

A reference density is 1 plus a finite combination of the real orthonormal
cosine elements sqrt(2)*cos(2*pi*<z, x>), with amplitudes indexed by
strictly-positive-orthant frequencies (every coordinate >= 1). The constant
term is pinned at 1, so the density integrates to exactly 1; an amplitude
alpha at positive z corresponds to complex spectral coefficients
alpha/sqrt(2) at both +z and -z.

Worst-case perturbation families place a common amplitude c with chosen
signs on every orthant frequency of a ball. The smooth construction uses
c = (positive-orthant strength of b)^(-1/2) so the b-norm of the
perturbation is exactly 1 by construction; the unsmooth fallback uses the
smaller c = zeta^(-D). Nonnegativity is certified either by the analytic
sufficient condition c*sqrt(2)*zeta^D <= 1 (conservative) or by a dense
grid minimum (sharp; 64*zeta points per axis).

Sampling contract: rejection sampling against the uniform proposal with the
triangle-inequality envelope M = 1 + sqrt(2)*sum|alpha|. The generator is
the counter-based Philox stream keyed by the 64-bit seed; proposals are
drawn in fixed blocks of 8192 (per block: an (8192, D) uniform array for
coordinates, then 8192 uniforms for the accept test), and the first n
accepted points in draw order are returned. Given the same seed the output
is byte-identical; streams for different seeds are independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    NonnegativityViolation,
)
from .frequency import Frequency, FrequencySet, lattice_ball, norm_linf
from .spectral import SampleSet, SpectralProfile
from .weights import WeightFamily, in_support, inverse_square_weight

_SQRT2 = math.sqrt(2.0)
_SAMPLE_BLOCK = 8192
_GRID_POINT_CAP = 1 << 22  # total grid size guard for multi-axis validation


@dataclass(frozen=True)
class ReferenceDensity:
    """1 + sum_z amplitude_z * sqrt(2) * cos(2*pi*<z, x>) with orthant keys."""

    dimension: int
    amplitudes: tuple[tuple[Frequency, float], ...]

    def __post_init__(self):
        seen = set()
        for z, alpha in self.amplitudes:
            if len(z) != self.dimension:
                raise ConfigurationError(f"frequency {z} has wrong dimension")
            if any(c < 1 for c in z):
                raise ConfigurationError(
                    f"amplitude keys must lie in the positive orthant, got {z}"
                )
            if z in seen:
                raise ConfigurationError(f"duplicate amplitude key {z}")
            if not math.isfinite(alpha):
                raise ConfigurationError(f"amplitude at {z} must be finite")
            seen.add(z)

    @property
    def max_band(self) -> int:
        return max((norm_linf(z) for z, _ in self.amplitudes), default=0)

    @property
    def envelope(self) -> float:
        """Pointwise upper bound 1 + sqrt(2)*sum|alpha| (triangle inequality)."""
        return 1.0 + _SQRT2 * math.fsum(abs(alpha) for _, alpha in self.amplitudes)

    def amplitude_map(self) -> dict[Frequency, float]:
        return dict(self.amplitudes)

    def coefficient(self, z: Frequency) -> complex:
        """Complex spectral coefficient at any lattice frequency."""
        z = tuple(z)
        if all(c == 0 for c in z):
            return complex(1.0)
        amp = self.amplitude_map()
        if z in amp:
            return complex(amp[z] / _SQRT2)
        neg = tuple(-c for c in z)
        if neg in amp:
            return complex(amp[neg] / _SQRT2)
        return complex(0.0)


def _eval_batch(p: ReferenceDensity, xs: np.ndarray) -> np.ndarray:
    """Density values at an (m, D) batch of torus points."""
    if not p.amplitudes:
        return np.ones(xs.shape[0])
    zs = np.array([z for z, _ in p.amplitudes], dtype=np.float64)  # (k, D)
    amps = np.array([alpha for _, alpha in p.amplitudes])  # (k,)
    phases = 2.0 * np.pi * (xs @ zs.T)  # (m, k)
    return 1.0 + (_SQRT2 * np.cos(phases)) @ amps


def density_eval(p: ReferenceDensity, x) -> float:
    """Pointwise density value; x must lie in [0, 1)^D."""
    if np.isscalar(x):
        x = (float(x),)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != p.dimension:
        raise DomainError(f"point has dimension {x.shape[0]}, expected {p.dimension}")
    if np.any(x < 0.0) or np.any(x >= 1.0):
        raise DomainError(f"point {tuple(x)} outside [0, 1)^D")
    return float(_eval_batch(p, x.reshape(1, -1))[0])


def grid_min(p: ReferenceDensity, points_per_axis: int | None = None):
    """(minimum, argmin point) of the density over a uniform grid.

    Default resolution is 64 points per axis per unit of the highest band,
    enough to resolve every retained oscillation; the total point count is
    capped so high-dimensional fixtures stay tractable.
    """
    if points_per_axis is None:
        points_per_axis = 64 * max(1, p.max_band)
    cap_per_axis = max(8, int(round(_GRID_POINT_CAP ** (1.0 / p.dimension))))
    points_per_axis = min(points_per_axis, cap_per_axis)
    axis = np.arange(points_per_axis, dtype=np.float64) / points_per_axis
    grids = np.meshgrid(*([axis] * p.dimension), indexing="ij")
    pts = np.stack(grids, axis=-1).reshape(-1, p.dimension)
    vals = _eval_batch(p, pts)
    idx = int(np.argmin(vals))
    return float(vals[idx]), tuple(float(c) for c in pts[idx])


def make_trig_density(
    amplitudes: Mapping[Frequency, float] | Mapping[int, float],
    dimension: int | None = None,
    check: bool = True,
) -> ReferenceDensity:
    """Density 1 + sum alpha_z*sqrt(2)*cos(2*pi*<z,x>), validated nonnegative.

    Integer keys are shorthand for one-dimensional frequencies. Validation
    short-circuits on the sufficient condition sqrt(2)*sum|alpha| <= 1 and
    otherwise falls back to a dense grid minimum.
    """
    normalized: list[tuple[Frequency, float]] = []
    for z, alpha in amplitudes.items():
        if isinstance(z, int):
            z = (z,)
        normalized.append((tuple(int(c) for c in z), float(alpha)))
    normalized.sort(key=lambda item: item[0])
    if dimension is None:
        if not normalized:
            raise ConfigurationError("dimension required for the uniform density")
        dimension = len(normalized[0][0])
    density = ReferenceDensity(dimension=dimension, amplitudes=tuple(normalized))
    if check:
        validate_nonnegative(density)
    return density


def uniform_density(dimension: int) -> ReferenceDensity:
    return ReferenceDensity(dimension=dimension, amplitudes=())


def validate_nonnegative(p: ReferenceDensity) -> None:
    """Raise NonnegativityViolation if the density dips below -1e-12 anywhere.

    The analytic envelope check is conservative; the grid minimum is sharp.
    """
    slack = p.envelope - 1.0  # sqrt(2) * sum |alpha|
    if slack <= 1.0:
        return
    minimum, argmin = grid_min(p)
    if minimum < -1e-12:
        raise NonnegativityViolation(
            f"density reaches {minimum:.6g} at {argmin}", point=argmin, min_value=minimum
        )


# ---------------------------------------------------------------------------
# Worst-case perturbation family
# ---------------------------------------------------------------------------

def alternating_signs(zeta: int, dimension: int) -> dict[Frequency, int]:
    """Signs flipping with coordinate-sum parity, arranged so every cosine
    term is -1 at the torus midpoint: the perturbation's trough stacks there,
    making the analytic nonnegativity condition sharp rather than merely
    sufficient."""
    orthant = lattice_ball(zeta, dimension, "positive_orthant")
    return {z: (1 if sum(z) % 2 == 1 else -1) for z in orthant.members}


def random_signs(zeta: int, dimension: int, seed: int) -> dict[Frequency, int]:
    """Independent +/-1 signs from a Philox stream keyed by seed."""
    orthant = lattice_ball(zeta, dimension, "positive_orthant")
    rng = np.random.Generator(np.random.Philox(key=seed))
    draws = rng.integers(0, 2, size=len(orthant.members)) * 2 - 1
    return {z: int(s) for z, s in zip(orthant.members, draws)}


def orthant_strength(family: WeightFamily, zeta: int, dimension: int) -> float:
    """Sum of 1/w_z^2 over the orthant block {1..zeta}^D (family support applies)."""
    orthant = lattice_ball(zeta, dimension, "positive_orthant")
    return math.fsum(inverse_square_weight(family, z) for z in orthant.members)


def make_worst_case(
    zeta: int,
    signs: Mapping[Frequency, int],
    b: WeightFamily,
    dimension: int,
    regime: str = "smooth",
) -> ReferenceDensity:
    """Uniform density plus +/- c * sqrt(2)*cos perturbations on {1..zeta}^D.

    smooth:   c = (orthant strength of b)^(-1/2), so the perturbation's
              b-weighted energy is exactly 1 by construction.
    unsmooth: c = zeta^(-D), the smaller value needed when b is too weak for
              the smooth choice to stay nonnegative.

    Raises NonnegativityViolation (with the offending grid point) when the
    signed sum dips below zero; validity is decided by the analytic
    sufficient condition c*sqrt(2)*zeta^D <= 1 or, failing that, the grid.
    """
    if zeta < 1:
        raise ConfigurationError("zeta must be >= 1")
    if regime not in ("smooth", "unsmooth"):
        raise ConfigurationError(f"unknown regime {regime!r}")
    orthant = lattice_ball(zeta, dimension, "positive_orthant")
    for z in orthant.members:
        if z not in signs:
            raise ConfigurationError(f"signs missing orthant frequency {z}")
        if signs[z] not in (-1, 1):
            raise ConfigurationError(f"sign at {z} must be +/-1, got {signs[z]}")
    if regime == "smooth":
        strength = orthant_strength(b, zeta, dimension)
        if strength <= 0:
            raise ConfigurationError("b has no support on the orthant block")
        c = strength**-0.5
    else:
        c = float(zeta) ** (-dimension)
    amplitudes = {z: c * signs[z] for z in orthant.members}
    return make_trig_density(amplitudes, dimension=dimension, check=True)


@dataclass(frozen=True)
class WorstCaseValidation:
    """Itemized check of the perturbation-family claims for one density."""

    norm_b_sq: float
    norm_b_ok: bool
    gap: float
    expected_gap: float
    gap_ok: bool
    integral_ok: bool
    grid_minimum: float
    grid_argmin: tuple
    nonneg_ok: bool
    degenerate: bool
    tv_bound: float | None
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def _orthant_weighted_energy(
    g: ReferenceDensity, family: WeightFamily, zeta: int, dimension: int
) -> float:
    """sum alpha_z^2 / w_z^2 over the orthant block, in lex key order.

    This is the perturbation energy in the real cosine system: the two
    conjugate complex coefficients alpha/sqrt(2) at +/-z contribute the same
    total, so the value matches the symmetric-lattice convention.
    """
    orthant = lattice_ball(zeta, dimension, "positive_orthant")
    amp = g.amplitude_map()
    return math.fsum(
        amp.get(z, 0.0) ** 2 * inverse_square_weight(family, z)
        for z in orthant.members
    )


def validate_worst_case(
    g: ReferenceDensity,
    b: WeightFamily,
    a: WeightFamily,
    zeta: int,
    dimension: int,
    regime: str = "smooth",
    n: int | None = None,
) -> WorstCaseValidation:
    """Check the four construction claims for a worst-case density.

    1. b-weighted perturbation energy is exactly 1 (smooth; the common
       amplitude must be bit-identical to the construction formula) or <= 1
       (unsmooth).
    2. a-weighted energy gap over uniform equals (orthant strength of a) *
       c^2, to 1e-12.
    3. Unit mass holds analytically (the constant term is pinned at 1).
    4. Grid minimum >= -1e-12.

    A density with no amplitude terms is flagged degenerate (gap 0). When n
    is given, the likelihood-closeness bound exp(n*c^2*zeta^(D/2)) - 1 is
    reported for the construction's amplitude.
    """
    from .theory import tv_bound as _tv_bound

    failures: list[str] = []
    amp = g.amplitude_map()
    degenerate = not amp
    c = max((abs(alpha) for alpha in amp.values()), default=0.0)

    norm_b_sq = _orthant_weighted_energy(g, b, zeta, dimension)
    if regime == "smooth":
        if degenerate:
            norm_b_ok = False
            failures.append("degenerate density: no perturbation terms")
        else:
            strength = orthant_strength(b, zeta, dimension)
            norm_b_ok = c == strength**-0.5 and abs(norm_b_sq - 1.0) <= 1e-12
            if not norm_b_ok:
                failures.append(
                    f"b-energy {norm_b_sq!r} not unit / amplitude off construction"
                )
    else:
        norm_b_ok = norm_b_sq <= 1.0 + 1e-12
        if not norm_b_ok:
            failures.append(f"b-energy {norm_b_sq!r} exceeds 1")

    gap = _orthant_weighted_energy(g, a, zeta, dimension)
    strength_a = orthant_strength(a, zeta, dimension)
    if regime == "smooth":
        strength_b = orthant_strength(b, zeta, dimension)
        expected_gap = strength_a / strength_b if strength_b > 0 else math.nan
    else:
        expected_gap = strength_a / float(zeta) ** (2 * dimension)
    if degenerate:
        gap_ok = gap == 0.0
        expected_gap = 0.0
    else:
        gap_ok = abs(gap - expected_gap) <= 1e-12
    if not gap_ok:
        failures.append(f"energy gap {gap!r} differs from expected {expected_gap!r}")

    integral_ok = True  # constant term is 1 by representation; cosines integrate to 0

    minimum, argmin = grid_min(g)
    nonneg_ok = minimum >= -1e-12
    if not nonneg_ok:
        failures.append(f"grid minimum {minimum:.6g} at {argmin}")

    tv = None
    if n is not None:
        tv = _tv_bound(n, c, zeta, dimension)

    return WorstCaseValidation(
        norm_b_sq=norm_b_sq,
        norm_b_ok=norm_b_ok,
        gap=gap,
        expected_gap=expected_gap,
        gap_ok=gap_ok,
        integral_ok=integral_ok,
        grid_minimum=minimum,
        grid_argmin=argmin,
        nonneg_ok=nonneg_ok,
        degenerate=degenerate,
        tv_bound=tv,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# Exact functionals and spectra
# ---------------------------------------------------------------------------

def exact_product(
    p: ReferenceDensity,
    q: ReferenceDensity,
    a: WeightFamily,
    Z: FrequencySet | None = None,
) -> float:
    """Exact weighted spectral product of two reference densities.

    Sums coefficient(p, z) * conj(coefficient(q, z)) / a_z^2 over Z, or over
    every frequency carrying mass when Z is None (the untruncated
    functional). Frequencies outside a's support contribute 0 — absent terms
    simply do not appear in the functional.
    """
    if p.dimension != q.dimension:
        raise ConfigurationError("densities have different dimensions")
    if Z is None:
        keys: set[Frequency] = {tuple([0] * p.dimension)}
        for z, _ in p.amplitudes:
            keys.add(z)
            keys.add(tuple(-c for c in z))
        for z, _ in q.amplitudes:
            keys.add(z)
            keys.add(tuple(-c for c in z))
        frequencies = sorted(keys)
    else:
        frequencies = list(Z.members)
    terms = []
    for z in frequencies:
        inv = inverse_square_weight(a, z)
        if inv == 0.0:
            continue
        cp = p.coefficient(z)
        cq = q.coefficient(z)
        if cp == 0.0 or cq == 0.0:
            continue
        terms.append((cp * cq.conjugate()).real * inv)
    return math.fsum(terms)


def l2_norm_sq(p: ReferenceDensity) -> float:
    """Squared L2 norm of the density: 1 + sum of squared amplitudes (Parseval)."""
    return 1.0 + math.fsum(alpha * alpha for _, alpha in p.amplitudes)


def weighted_norm_sq(p: ReferenceDensity, family: WeightFamily) -> float:
    """Exact squared seminorm of p under the family's weight net."""
    return exact_product(p, p, family, None)


def spectral_profile(p: ReferenceDensity, Z: FrequencySet) -> SpectralProfile:
    """Exact spectral coefficients of p restricted to Z."""
    coeffs = {z: p.coefficient(z) for z in Z.members}
    return SpectralProfile(coefficients=coeffs, provenance=("exact",))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample(p: ReferenceDensity, n: int, seed: int, label: str = "") -> SampleSet:
    """n i.i.d. draws via rejection sampling (see module docstring for the
    exact, reproducible algorithm)."""
    if n < 1:
        raise ConfigurationError(f"need n >= 1, got {n}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    envelope = p.envelope
    out = np.empty((n, p.dimension), dtype=np.float64)
    filled = 0
    while filled < n:
        xs = rng.random((_SAMPLE_BLOCK, p.dimension))
        us = rng.random(_SAMPLE_BLOCK)
        accepted = xs[us * envelope <= _eval_batch(p, xs)]
        take = min(n - filled, accepted.shape[0])
        out[filled : filled + take] = accepted[:take]
        filled += take
    return SampleSet(dimension=p.dimension, points=out, label=label)


# ---------------------------------------------------------------------------
# Fixture serialization
# ---------------------------------------------------------------------------

def density_to_dict(p: ReferenceDensity) -> dict:
    return {
        "dimension": p.dimension,
        "amplitudes": [
            {"z": list(z), "amplitude": alpha} for z, alpha in p.amplitudes
        ],
    }


def density_from_dict(d: dict, check: bool = True) -> ReferenceDensity:
    amplitudes = {
        tuple(int(c) for c in item["z"]): float(item["amplitude"])
        for item in d.get("amplitudes", [])
    }
    return make_trig_density(amplitudes, dimension=int(d["dimension"]), check=check)


def density_to_json(p: ReferenceDensity) -> str:
    return json.dumps(density_to_dict(p))


def density_from_json(text: str, check: bool = True) -> ReferenceDensity:
    return density_from_dict(json.loads(text), check=check)
