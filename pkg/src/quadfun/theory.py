"""Closed-form error bounds, the minimax rate table, and rate cross-checks.

Implemented bounds, for estimating the weighted spectral product of two
distributions lying in the unit b-ellipsoid from n samples each:

  bias:      |E[estimate] - truth| <= |P|_b |Q|_b * sup_tail b_z^2/a_z^2
  variance:  2|P|_2|Q|_2/n^2 * sum_Z a_z^-4
             + (|Q|_b^2 |P|_b + |P|_b^2 |Q|_b)/n * R(a, b, Z)
             + 2|P|_a^2 |Q|_a^2 / n
  mse:       squared bias bound + variance bound

where R is the three-factor variance functional from the weights module.
Norm estimation is the Q -> P collapse of the same expressions (a mode flag,
not a separate formula).

Rates are reported as exponents of n plus a log-factor annotation, never as
raw error numbers: the table is only determined up to logarithmic factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, EstimationError
from .estimators import select_zeta_lecam
from .frequency import FrequencySet, ball_array
from .weights import (
    WeightFamily,
    inverse_square_weights,
    strength_sum,
    strength_sums,
    tail_sup_ratio,
    variance_functional,
    weight_at,
    in_support,
)


# ---------------------------------------------------------------------------
# Upper bounds
# ---------------------------------------------------------------------------

def bias_bound(
    norm_b_p: float,
    norm_b_q: float,
    a: WeightFamily,
    b: WeightFamily,
    zeta: int,
    dimension: int,
) -> float:
    """Deterministic truncation-bias bound |P|_b |Q|_b sup_tail b^2/a^2."""
    if norm_b_p < 0 or norm_b_q < 0:
        raise ValueError("norms must be nonnegative")
    if norm_b_p == 0.0 or norm_b_q == 0.0:
        return 0.0
    return norm_b_p * norm_b_q * tail_sup_ratio(a, b, zeta, dimension)


def _sum_inv_fourth(a: WeightFamily, Z: FrequencySet) -> float:
    inv = inverse_square_weights(a, Z.coords_array())
    return math.fsum((inv * inv).tolist())


def variance_bound(
    norm2_p: float,
    norm2_q: float,
    norm_b_p: float,
    norm_b_q: float,
    norm_a_p: float,
    norm_a_q: float,
    a: WeightFamily,
    b: WeightFamily,
    Z: FrequencySet,
    n: int,
) -> float:
    """Variance bound for the bilinear estimator over Z with n samples per side."""
    if n < 1:
        raise EstimationError(f"need n >= 1, got {n}")
    term1 = 2.0 * norm2_p * norm2_q / (n * n) * _sum_inv_fourth(a, Z)
    coupled = variance_functional(a, b, Z)
    term2 = (norm_b_q**2 * norm_b_p + norm_b_p**2 * norm_b_q) / n * coupled
    term3 = 2.0 * norm_a_p**2 * norm_a_q**2 / n
    return term1 + term2 + term3


def mse_bound(
    norm2_p: float,
    norm2_q: float,
    norm_b_p: float,
    norm_b_q: float,
    norm_a_p: float,
    norm_a_q: float,
    a: WeightFamily,
    b: WeightFamily,
    Z: FrequencySet,
    n: int,
    zeta: int | None = None,
    norm_mode: bool = False,
) -> float:
    """Squared-bias-plus-variance bound; norm_mode collapses Q onto P.

    zeta defaults to Z's radius (the tail starts just outside the ball).
    """
    if norm_mode:
        norm2_q, norm_b_q, norm_a_q = norm2_p, norm_b_p, norm_a_p
    if zeta is None:
        zeta = Z.radius
    bias = bias_bound(norm_b_p, norm_b_q, a, b, zeta, Z.dimension)
    if math.isinf(bias):
        return math.inf
    return bias * bias + variance_bound(
        norm2_p, norm2_q, norm_b_p, norm_b_q, norm_a_p, norm_a_q, a, b, Z, n
    )


# ---------------------------------------------------------------------------
# Minimax rate table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatePrediction:
    """Minimax-rate exponent report.

    exponent is the power of n in the error rate (power of log n for the
    doubly-logarithmic cell), with math.inf flagging an inconsistent pair
    whose estimand may be infinite.
    """

    exponent: float
    regime: str  # parametric | nonparametric | inconsistent | upper_bound_only
    log_factor_note: str = ""

    @property
    def inconsistent(self) -> bool:
        return math.isinf(self.exponent)


_TABLE_KINDS = ("logarithmic", "sobolev", "exponential", "gaussian")
_KIND_RANK = {k: i for i, k in enumerate(_TABLE_KINDS)}

_INCONSISTENT = RatePrediction(
    exponent=math.inf,
    regime="inconsistent",
    log_factor_note="estimand may be infinite; consistent estimation impossible",
)


def _classify(exponent: float, note: str) -> RatePrediction:
    regime = "parametric" if exponent == -1.0 else "nonparametric"
    return RatePrediction(exponent=exponent, regime=regime, log_factor_note=note)


def minimax_rate(a: WeightFamily, b: WeightFamily, dimension: int) -> RatePrediction:
    """Rate-table cell for the weight pair (a, b) in dimension D.

    Constant weights are the zero-parameter member of the partner's kind;
    a band-limited net on either side makes the problem parametric (finitely
    many exactly estimable terms).
    """
    if dimension < 1:
        raise ConfigurationError("dimension must be >= 1")
    if a.kind == "custom" or b.kind == "custom":
        raise ConfigurationError("rate table covers built-in decay kinds only")
    if a.kind == "sinc" or b.kind == "sinc":
        return RatePrediction(
            exponent=-1.0,
            regime="parametric",
            log_factor_note="band-limited net: fixed finite frequency set, zero bias",
        )

    ka, s = (a.kind, a.param) if a.kind != "constant" else (None, 0.0)
    kb, t = (b.kind, b.param) if b.kind != "constant" else (None, 0.0)
    if ka is not None and s == 0:
        ka = None
    if kb is not None and t == 0:
        kb = None
    if ka is None and kb is None:
        return _classify(0.0, "flat weights on both sides: no vanishing rate")
    if ka is None:
        ka = kb  # constant a is the s=0 member of b's kind
    if kb is None:
        kb = ka  # constant b is the t=0 member of a's kind; t=0 < s is inconsistent

    if ka == kb:
        if t < s:
            return _INCONSISTENT
        if ka == "sobolev":
            raw = 8.0 * (s - t) / (4.0 * t + dimension)
            return _classify(max(-1.0, raw), "up to log n factors")
        if ka in ("gaussian", "exponential"):
            if t == 0:
                return _classify(0.0, "flat weights on both sides: no vanishing rate")
            raw = 2.0 * (s - t) / t
            return _classify(max(-1.0, raw), "up to log n factors")
        if ka == "logarithmic":
            return RatePrediction(
                exponent=4.0 * (s - t),
                regime="upper_bound_only",
                log_factor_note=(
                    "exponent applies to log n, up to log log n factors; "
                    "only the upper bound is known"
                ),
            )
        raise AssertionError(ka)

    if _KIND_RANK[kb] > _KIND_RANK[ka]:
        if ka == "logarithmic" and kb == "sobolev":
            raw = -8.0 * t / (4.0 * t + dimension)
            return _classify(max(-1.0, raw), "up to log n factors")
        return _classify(-1.0, "up to log n factors")
    return _INCONSISTENT


# ---------------------------------------------------------------------------
# Lower-bound rate and likelihood-closeness bound
# ---------------------------------------------------------------------------

def lower_bound_rate(
    a: WeightFamily,
    b: WeightFamily,
    n: int,
    dimension: int,
    kappa: float = 2.0,
) -> float:
    """Worst-case-family lower bound on the achievable mean squared error.

    Solves the strength balance B_zeta^2 = zeta^D n^2 for the radius. When
    the smoothness strength satisfies B_zeta >= kappa * zeta^(2D) (so the
    unit-energy perturbations stay nonnegative; kappa defaults to 2,
    matching the sqrt(2) amplitude of the real cosine system), the bound is
    max{(A_zeta/B_zeta)^2, 1/n}. Otherwise the smaller-amplitude fallback
    construction gives max{A(ceil(n^(2/(3D))))^2 / n^(8/3), 1/n}.
    """
    if n < 2:
        raise EstimationError(f"need n >= 2, got {n}")
    zeta = select_zeta_lecam(b, n, dimension)
    strength_a, strength_b = strength_sums(a, b, zeta, dimension)
    if strength_b >= kappa * float(zeta) ** (2 * dimension):
        gap_sq = (strength_a / strength_b) ** 2
        return max(gap_sq, 1.0 / n)
    zeta_u = max(1, math.ceil(n ** (2.0 / (3.0 * dimension))))
    strength_u = strength_sum(a, zeta_u, dimension)
    return max(strength_u**2 / n ** (8.0 / 3.0), 1.0 / n)


def tv_bound(n: int, c: float, zeta: int, dimension: int) -> float:
    """exp(n * c^2 * zeta^(D/2)) - 1: likelihood closeness of the sign-mixture.

    Small values certify that n samples cannot tell the uniform density from
    the mixture of perturbed densities with common amplitude c.
    """
    if c < 0:
        raise ValueError("amplitude c must be nonnegative")
    exponent = n * c * c * float(zeta) ** (dimension / 2.0)
    if exponent > 700.0:
        return math.inf
    return math.expm1(exponent)


# ---------------------------------------------------------------------------
# Upper/lower rate agreement check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatesMatchRow:
    zeta: int
    ratio_bias_vs_gap: float
    ratio_balance: float


@dataclass(frozen=True)
class RatesMatchReport:
    rows: tuple[RatesMatchRow, ...]
    match: bool
    band: tuple[float, float]


def _boundary_weight(family: WeightFamily, zeta: int, dimension: int) -> float:
    """Weight at the canonical minimal-norm point of the shell ||z||_inf = zeta."""
    if family.support_rule in ("positive_orthant", "nonzero_coords"):
        point = (zeta,) + (1,) * (dimension - 1)
    else:
        point = (zeta,) + (0,) * (dimension - 1)
    if not in_support(family, point):
        raise ConfigurationError(f"boundary point {point} outside support")
    return weight_at(family, point)


def rates_match_check(
    a: WeightFamily,
    b: WeightFamily,
    dimension: int,
    zeta_grid,
    band: tuple[float, float] = (1e-2, 1e2),
) -> RatesMatchReport:
    """Check whether the upper- and lower-bound constructions track each other.

    For each zeta, with boundary-shell weights a_zeta, b_zeta and cumulative
    strengths A, B:

        ratio1 = (a_zeta^-4 / b_zeta^-4) / (A/B)^2
        ratio2 = b_zeta^4 B^2 / (a_zeta^4 * sum_Z a_z^-4 * zeta^D)

    Both stay inside a fixed band exactly when the two bound families give
    the same rate up to constants.
    """
    zetas = [int(z) for z in zeta_grid]
    if not zetas:
        raise ConfigurationError("zeta grid must be nonempty")
    rows = []
    ok = True
    for zeta in zetas:
        try:
            aw = _boundary_weight(a, zeta, dimension)
            bw = _boundary_weight(b, zeta, dimension)
        except ConfigurationError:
            rows.append(RatesMatchRow(zeta, math.nan, math.nan))
            ok = False
            continue
        strength_a, strength_b = strength_sums(a, b, zeta, dimension)
        pts = ball_array(zeta, dimension, a.support_rule)
        inv = inverse_square_weights(a, pts)
        sum_fourth = math.fsum((inv * inv).tolist())
        if strength_b == 0 or sum_fourth == 0:
            rows.append(RatesMatchRow(zeta, math.nan, math.nan))
            ok = False
            continue
        ratio1 = (bw**4 / aw**4) / (strength_a / strength_b) ** 2
        ratio2 = (bw**4 * strength_b**2) / (
            aw**4 * sum_fourth * float(zeta) ** dimension
        )
        rows.append(RatesMatchRow(zeta, ratio1, ratio2))
        for r in (ratio1, ratio2):
            if not (band[0] <= r <= band[1]):
                ok = False
    return RatesMatchReport(rows=tuple(rows), match=ok, band=band)
