"""Weight nets over the frequency lattice and derived strength functionals.

A weight net assigns a positive coefficient to every lattice frequency in its
support; the net's decay profile determines both the functional being
estimated (through 1/a_z^2 factors) and the smoothness class (through b_z).
Built-in kinds:

    constant          w_z = 1
    sobolev(s)        w_z = ||z||_2^(-s)          (origin excluded when s > 0)
    gaussian(s)       w_z = exp(-s ||z||_2^2)
    exponential(s)    w_z = exp(-s ||z||_1)
    logarithmic(s)    w_z = (ln ||z||_2)^(-s)     (support restricted to ||z||_2 >= 2)
    sinc(s)           w_z = 1 on ||z||_inf <= s, absent outside the band
    custom            explicit table of (frequency, weight) pairs

The norm choices (l2 for sobolev/gaussian/logarithmic, l1 for exponential)
only move constants around, but they are fixed here so that every sum is
reproducible. All scalar sums are accumulated with math.fsum over the
lexicographic lattice order, so repeated runs are bit-identical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigurationError, DataFormatError, SupportError
from .frequency import (
    NEGATION_SYMMETRIC_RULES,
    SUPPORT_RULES,
    Frequency,
    FrequencySet,
    ball_array,
    norm_l1,
    norm_l2,
    norm_linf,
)

KINDS = ("constant", "sobolev", "gaussian", "exponential", "logarithmic", "sinc", "custom")

# Decay-strength ranking used for analytic pair-consistency checks; a pair
# (a, b) admits finite tail ratios iff b decays at least as fast as a.
_RANK = {"constant": 0, "logarithmic": 1, "sobolev": 2, "exponential": 3, "gaussian": 4}


@dataclass(frozen=True)
class WeightFamily:
    """A negation-symmetric weight net {w_z} with a support rule.

    Immutable value object; all operations on it are pure.
    """

    kind: str
    param: float = 0.0
    support_rule: str = "all"
    table: Mapping[Frequency, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown weight kind {self.kind!r}")
        if self.support_rule not in SUPPORT_RULES:
            raise ConfigurationError(f"unknown support rule {self.support_rule!r}")
        if self.kind == "custom":
            if not self.table:
                raise ConfigurationError("custom weight family requires a table")
        else:
            if self.param < 0:
                raise ConfigurationError("weight parameter must be nonnegative")
            if self.kind == "sinc" and (self.param < 1 or self.param != int(self.param)):
                raise ConfigurationError("sinc band must be a positive integer")


def weight_family(kind: str, param: float = 0.0, support_rule: str | None = None) -> WeightFamily:
    """Build a family with the conventional default support rule per kind.

    Sobolev and logarithmic nets default to exclude_origin (they annihilate
    constants); everything else defaults to the full lattice.
    """
    if support_rule is None:
        support_rule = "exclude_origin" if kind in ("sobolev", "logarithmic") else "all"
    return WeightFamily(kind=kind, param=float(param), support_rule=support_rule)


def custom_weight_family(
    table: Mapping[Frequency, float], support_rule: str = "all"
) -> WeightFamily:
    """Custom family from an explicit table; validates positivity and symmetry."""
    clean: dict[Frequency, float] = {}
    for z, w in table.items():
        z = tuple(int(c) for c in z)
        w = float(w)
        if math.isnan(w) or w <= 0:
            raise ConfigurationError(f"weight at {z} must be positive, got {w}")
        clean[z] = w
    if support_rule in NEGATION_SYMMETRIC_RULES:
        for z, w in clean.items():
            neg = tuple(-c for c in z)
            if neg not in clean or clean[neg] != w:
                raise ConfigurationError(
                    f"custom table breaks negation symmetry at {z}"
                )
    return WeightFamily(kind="custom", param=0.0, support_rule=support_rule, table=clean)


def load_weight_table_csv(path: str, support_rule: str = "all") -> WeightFamily:
    """Read a custom weight table from CSV with header z_1,...,z_D,weight.

    Strict parse: every row needs D integers and one positive finite weight;
    NaN, nonpositive weights, and duplicate frequencies are rejected with the
    offending line number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty weight table", line=1) from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[-1] != "weight":
            raise DataFormatError("header must be z_1,...,z_D,weight", line=1)
        dim = len(header) - 1
        expected = [f"z_{i + 1}" for i in range(dim)]
        if header[:-1] != expected:
            raise DataFormatError("header must be z_1,...,z_D,weight", line=1)
        table: dict[Frequency, float] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != dim + 1:
                raise DataFormatError(f"expected {dim + 1} columns", line=lineno)
            try:
                z = tuple(int(cell) for cell in row[:-1])
                w = float(row[-1])
            except ValueError as exc:
                raise DataFormatError(str(exc), line=lineno) from None
            if math.isnan(w):
                raise DataFormatError("weight is NaN", line=lineno)
            if w <= 0:
                raise DataFormatError(f"weight must be positive, got {w}", line=lineno)
            if z in table:
                raise DataFormatError(f"duplicate frequency {z}", line=lineno)
            table[z] = w
    try:
        return custom_weight_family(table, support_rule=support_rule)
    except ConfigurationError as exc:
        raise DataFormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# Pointwise evaluation and support
# ---------------------------------------------------------------------------

def in_support(family: WeightFamily, z: Frequency) -> bool:
    z = tuple(z)
    from .frequency import passes_rule

    if not passes_rule(family.support_rule, z):
        return False
    if family.kind == "sobolev" and family.param > 0:
        return any(c != 0 for c in z)
    if family.kind == "logarithmic":
        return norm_l2(z) >= 2.0
    if family.kind == "sinc":
        return norm_linf(z) <= family.param
    if family.kind == "custom":
        return z in family.table
    return True


def weight_at(family: WeightFamily, z: Frequency) -> float:
    """The weight w_z; raises SupportError outside support.

    Callers that want the 0/0 convention (absent terms contribute nothing)
    should use inverse_square_weight instead.
    """
    z = tuple(z)
    if not in_support(family, z):
        raise SupportError(f"{z} outside support of {family.kind} family")
    k, s = family.kind, family.param
    if k == "constant" or k == "sinc":
        return 1.0
    if k == "sobolev":
        return 1.0 if s == 0 else norm_l2(z) ** (-s)
    if k == "gaussian":
        return math.exp(-s * sum(c * c for c in z))
    if k == "exponential":
        return math.exp(-s * norm_l1(z))
    if k == "logarithmic":
        return math.log(norm_l2(z)) ** (-s)
    return family.table[z]


def inverse_square_weight(family: WeightFamily, z: Frequency) -> float:
    """1/w_z^2, with 0.0 when z falls outside support (absent-term convention)."""
    if not in_support(family, z):
        return 0.0
    w = weight_at(family, z)
    return 1.0 / (w * w)


def _norms(coords: np.ndarray):
    sq = coords.astype(np.float64) ** 2
    l2 = np.sqrt(sq.sum(axis=1))
    l1 = np.abs(coords).sum(axis=1).astype(np.float64)
    linf = np.abs(coords).max(axis=1) if coords.shape[0] else np.empty(0)
    return l1, l2, linf


def _rule_mask(rule: str, coords: np.ndarray) -> np.ndarray:
    if rule == "all":
        return np.ones(coords.shape[0], dtype=bool)
    if rule == "exclude_origin":
        return np.any(coords != 0, axis=1)
    if rule == "positive_orthant":
        return np.all(coords >= 1, axis=1)
    if rule == "nonzero_coords":
        return np.all(coords != 0, axis=1)
    raise ValueError(f"unknown support rule {rule!r}")


def weights_array(family: WeightFamily, coords: np.ndarray) -> np.ndarray:
    """Vectorized w_z with 0.0 at out-of-support rows."""
    coords = np.asarray(coords, dtype=np.int64)
    if coords.size == 0:
        return np.zeros(0)
    l1, l2, linf = _norms(coords)
    mask = _rule_mask(family.support_rule, coords)
    k, s = family.kind, family.param
    if k == "constant":
        vals = np.ones_like(l2)
    elif k == "sobolev":
        if s == 0:
            vals = np.ones_like(l2)
        else:
            mask &= l2 > 0
            vals = np.where(l2 > 0, np.maximum(l2, 1.0) ** (-s), 0.0)
    elif k == "gaussian":
        with np.errstate(over="ignore", under="ignore"):
            vals = np.exp(-s * l2**2)
    elif k == "exponential":
        with np.errstate(over="ignore", under="ignore"):
            vals = np.exp(-s * l1)
    elif k == "logarithmic":
        mask &= l2 >= 2.0
        vals = np.log(np.maximum(l2, 2.0)) ** (-s)
    elif k == "sinc":
        mask &= linf <= family.param
        vals = np.ones_like(l2)
    else:  # custom
        vals = np.array(
            [family.table.get(tuple(int(c) for c in row), 0.0) for row in coords]
        )
        mask &= vals > 0
    return np.where(mask, vals, 0.0)


def inverse_square_weights(family: WeightFamily, coords: np.ndarray) -> np.ndarray:
    """Vectorized 1/w_z^2 with 0.0 at out-of-support rows."""
    coords = np.asarray(coords, dtype=np.int64)
    if coords.size == 0:
        return np.zeros(0)
    l1, l2, linf = _norms(coords)
    mask = _rule_mask(family.support_rule, coords)
    k, s = family.kind, family.param
    if k == "constant":
        vals = np.ones_like(l2)
    elif k == "sobolev":
        if s == 0:
            vals = np.ones_like(l2)
        else:
            mask &= l2 > 0
            vals = np.maximum(l2, 1.0) ** (2 * s)
    elif k == "gaussian":
        with np.errstate(over="ignore", under="ignore"):
            vals = np.exp(2 * s * l2**2)
    elif k == "exponential":
        with np.errstate(over="ignore", under="ignore"):
            vals = np.exp(2 * s * l1)
    elif k == "logarithmic":
        mask &= l2 >= 2.0
        vals = np.log(np.maximum(l2, 2.0)) ** (2 * s)
    elif k == "sinc":
        mask &= linf <= family.param
        vals = np.ones_like(l2)
    else:  # custom
        w = weights_array(family, coords)
        with np.errstate(divide="ignore"):
            vals = np.where(w > 0, 1.0 / np.maximum(w, 1e-300) ** 2, 0.0)
        return vals
    return np.where(mask, vals, 0.0)


# ---------------------------------------------------------------------------
# Strength sums
# ---------------------------------------------------------------------------

def strength_sum(family: WeightFamily, zeta: int, dimension: int) -> float:
    """Sum of 1/w_z^2 over the radius-zeta ball intersected with the support."""
    pts = ball_array(zeta, dimension, family.support_rule)
    inv = inverse_square_weights(family, pts)
    return math.fsum(inv.tolist())


def strength_sums(
    a: WeightFamily, b: WeightFamily, zeta: int, dimension: int
) -> tuple[float, float]:
    """Cumulative strengths (sum 1/a_z^2, sum 1/b_z^2) over the shared ball.

    Both families must share a support rule; each sum additionally respects
    its own family's intrinsic support (absent terms contribute 0).
    """
    if a.support_rule != b.support_rule:
        raise ConfigurationError(
            f"support rules differ: {a.support_rule!r} vs {b.support_rule!r}"
        )
    return strength_sum(a, zeta, dimension), strength_sum(b, zeta, dimension)


# ---------------------------------------------------------------------------
# Tail supremum of b_z^2 / a_z^2
# ---------------------------------------------------------------------------

def _effective(family: WeightFamily) -> tuple[str, float]:
    """Collapse zero-parameter decay kinds to 'constant' for pair analysis."""
    if family.kind in ("sobolev", "gaussian", "exponential", "logarithmic") and family.param == 0:
        return "constant", 0.0
    return family.kind, family.param


def pair_kinds_consistent(a_kind: str, s: float, b_kind: str, t: float) -> bool:
    """True when b decays at least as fast as a (so b_z/a_z stays bounded)."""
    if b_kind == "sinc":
        return True
    if a_kind == "sinc":
        return True  # absent a-terms vanish from the estimand; ratio finite
    if a_kind in ("sobolev", "gaussian", "exponential", "logarithmic") and s == 0:
        a_kind = "constant"
    if b_kind in ("sobolev", "gaussian", "exponential", "logarithmic") and t == 0:
        b_kind = "constant"
    ra, rb = _RANK[a_kind], _RANK[b_kind]
    if rb > ra:
        return True
    if rb < ra:
        return False
    return b_kind == "constant" or t >= s


def pair_consistent(a: WeightFamily, b: WeightFamily) -> bool:
    if a.kind == "custom" or b.kind == "custom":
        return True  # finite tables give finite (possibly zero) tail suprema
    return pair_kinds_consistent(a.kind, a.param, b.kind, b.param)


def _solve_increasing(f, target: float, lo: float) -> float:
    """Smallest u >= lo with f(u) >= target, for increasing f; bisection."""
    hi = max(2.0 * lo, lo + 1.0)
    while f(hi) < target:
        hi *= 2.0
        if hi > 1e30:
            return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def _boundary_points(shell: int, dimension: int, rule: str):
    """Minimal-norm and maximal-norm admissible points on the shell ||z||_inf = shell."""
    if rule in ("positive_orthant", "nonzero_coords"):
        lo = (shell,) + (1,) * (dimension - 1)
    else:
        lo = (shell,) + (0,) * (dimension - 1)
    hi = (shell,) * dimension
    return lo, hi


def _profile_tail_sup(a: WeightFamily, b: WeightFamily, zeta: int, dimension: int) -> float:
    """Tail supremum for built-in decay pairs via the radial ratio profile.

    The ratio b_z^2/a_z^2 depends on z only through its l1/l2 norms; for a
    consistent pair the profile is unimodal, so the supremum over the tail is
    the profile value at the larger of (the minimal admissible norm on the
    first excluded shell) and (the profile's stationary point). Where the two
    norms mix (exponential against an l2-based net) the profile is replaced
    with the tight norm-inequality envelope, which can only overestimate —
    safe for a bias bound.
    """
    ea, sa = _effective(a)
    eb, tb = _effective(b)
    rule = a.support_rule
    shell = zeta + 1
    lo_pt, _ = _boundary_points(shell, dimension, rule)
    u_min = norm_l2(lo_pt)
    v_min = float(norm_l1(lo_pt))

    # Everything runs in log space so the returned value decays to exactly 0
    # instead of saturating when both factors leave the float range.
    def log_inv_a_sq(u: float) -> float:
        if ea == "constant":
            return 0.0
        if ea == "sobolev":
            return 2 * sa * math.log(u)
        if ea == "gaussian":
            return 2 * sa * u * u
        if ea == "logarithmic":
            return 2 * sa * math.log(math.log(u))
        raise AssertionError(ea)

    def log_b_sq_l2(u: float) -> float:
        if eb == "constant":
            return 0.0
        if eb == "sobolev":
            return -2 * tb * math.log(u)
        if eb == "gaussian":
            return -2 * tb * u * u
        if eb == "logarithmic":
            return -2 * tb * math.log(math.log(u))
        raise AssertionError(eb)

    def finish(log_ratio: float) -> float:
        if log_ratio == 0.0:
            return 1.0
        return math.exp(min(log_ratio, 700.0))

    log_pair = "logarithmic" in (ea, eb)

    if eb == "exponential":
        # Profile in v = ||z||_1, using ||z||_2 <= ||z||_1 for the a-factor.
        v_lo = max(v_min, 2.0 if log_pair else 0.0)

        def log_ratio_v(v: float) -> float:
            la = 2 * sa * v if ea == "exponential" else log_inv_a_sq(v)
            return la - 2 * tb * v

        if ea == "sobolev" and sa > 0:
            v_star = sa / tb
        elif ea == "logarithmic" and sa > 0:
            v_star = _solve_increasing(lambda v: v * math.log(v), sa / tb, 1.0 + 1e-9)
        else:
            v_star = 0.0  # constant or exponential a: monotone nonincreasing
        return finish(log_ratio_v(max(v_lo, v_star)))

    if ea == "exponential":
        # b is gaussian (the only stronger kind); envelope via ||z||_1 <= sqrt(D)||z||_2.
        rootd = math.sqrt(dimension)
        u_star = sa * rootd / (2 * tb)
        u = max(u_min, u_star)
        return finish(2 * sa * rootd * u - 2 * tb * u * u)

    # Pure l2 profile.
    u_lo = max(u_min, 2.0 if log_pair else 0.0)
    if eb == "gaussian":
        if ea == "sobolev" and sa > 0:
            u_star = math.sqrt(sa / (2 * tb))
        elif ea == "logarithmic" and sa > 0:
            u_star = _solve_increasing(
                lambda u: u * u * math.log(u), sa / (2 * tb), 1.0 + 1e-9
            )
        else:
            u_star = 0.0
    elif eb == "sobolev" and ea == "logarithmic" and sa > 0:
        u_star = math.exp(sa / tb)
    else:
        u_star = 0.0
    u = max(u_lo, u_star)
    return finish(log_b_sq_l2(u) + log_inv_a_sq(u))


def _enumerated_tail_sup(a: WeightFamily, b: WeightFamily, zeta: int, frequencies) -> float:
    best = 0.0
    for z in frequencies:
        if norm_linf(z) <= zeta:
            continue
        inv_a = inverse_square_weight(a, z)
        if inv_a == 0.0:
            continue
        if not in_support(b, z):
            continue
        w = weight_at(b, z)
        best = max(best, w * w * inv_a)
    return best


def tail_sup_ratio(a: WeightFamily, b: WeightFamily, zeta: int, dimension: int) -> float:
    """sup of b_z^2/a_z^2 over lattice points outside the radius-zeta ball.

    Returns math.inf for inconsistent pairs (b decaying slower than a), which
    marks the corresponding estimand as potentially infinite. Terms where
    either net is absent contribute 0 (the absent-term convention), so
    band-limited nets give a zero supremum once the ball covers the band.
    """
    if a.support_rule != b.support_rule:
        raise ConfigurationError(
            f"support rules differ: {a.support_rule!r} vs {b.support_rule!r}"
        )
    if zeta < 0:
        raise ValueError("zeta must be nonnegative")

    if a.kind == "custom" or b.kind == "custom":
        if b.kind == "custom":
            return _enumerated_tail_sup(a, b, zeta, b.table.keys())
        return _enumerated_tail_sup(a, b, zeta, a.table.keys())

    if b.kind == "sinc":
        band = int(b.param)
        if zeta >= band:
            return 0.0
        best = 0.0
        for m in range(zeta + 1, band + 1):
            for pt in _boundary_points(m, dimension, a.support_rule):
                best = max(best, inverse_square_weight(a, pt))
        return best

    if a.kind == "sinc":
        band = int(a.param)
        if zeta >= band:
            return 0.0
        best = 0.0
        for m in range(zeta + 1, band + 1):
            for pt in _boundary_points(m, dimension, b.support_rule):
                if in_support(b, pt):
                    w = weight_at(b, pt)
                    best = max(best, w * w)
        return best

    if not pair_consistent(a, b):
        return math.inf
    return _profile_tail_sup(a, b, zeta, dimension)


# ---------------------------------------------------------------------------
# Variance functional
# ---------------------------------------------------------------------------

def variance_functional(a: WeightFamily, b: WeightFamily, Z: FrequencySet) -> float:
    """Three-factor Hoelder product driving the sample-coupled variance term:

        (sum b_z^4/a_z^8)^(1/4) * (sum (b_z/a_z^2)^8)^(1/8) * (sum b_z^8)^(1/8)

    summed over Z, with absent terms contributing 0. Empty Z gives 0.
    """
    coords = Z.coords_array()
    if coords.shape[0] == 0:
        return 0.0
    bw = weights_array(b, coords)
    inv_a = inverse_square_weights(a, coords)
    with np.errstate(over="ignore", under="ignore"):
        f1 = math.fsum((bw**4 * inv_a**4).tolist())
        f2 = math.fsum(((bw * inv_a) ** 8).tolist())
        f3 = math.fsum((bw**8).tolist())
    return f1**0.25 * f2**0.125 * f3**0.125


# ---------------------------------------------------------------------------
# Weight spec grammar (shared with the CLI): kind[:param][@support_rule]
# ---------------------------------------------------------------------------

def parse_weight_spec(spec: str) -> WeightFamily:
    """Parse 'kind:param@rule' one-token specs, e.g. 'sobolev:1.5@exclude_origin'.

    'custom:path.csv' loads a weight table from CSV.
    """
    text = spec.strip()
    rule = None
    if "@" in text:
        text, rule_text = text.rsplit("@", 1)
        rule = rule_text.strip()
        if rule not in SUPPORT_RULES:
            raise ConfigurationError(f"unknown support rule {rule!r} in {spec!r}")
    if ":" in text:
        kind, param_text = text.split(":", 1)
    else:
        kind, param_text = text, None
    kind = kind.strip()
    if kind == "custom":
        if param_text is None:
            raise ConfigurationError("custom weights need a CSV path: custom:path.csv")
        return load_weight_table_csv(param_text.strip(), support_rule=rule or "all")
    if kind not in KINDS:
        raise ConfigurationError(f"unknown weight kind {kind!r} in {spec!r}")
    if kind == "constant":
        if param_text not in (None, ""):
            raise ConfigurationError("constant weights take no parameter")
        param = 0.0
    else:
        if param_text is None:
            raise ConfigurationError(f"{kind} weights need a parameter, e.g. {kind}:1.0")
        try:
            param = float(param_text)
        except ValueError:
            raise ConfigurationError(f"bad weight parameter {param_text!r}") from None
    return weight_family(kind, param, support_rule=rule)


def format_weight_spec(family: WeightFamily) -> str:
    if family.kind == "custom":
        return f"custom[{len(family.table)} entries]@{family.support_rule}"
    if family.kind == "constant":
        return f"constant@{family.support_rule}"
    param = family.param
    param_text = str(int(param)) if param == int(param) else repr(param)
    return f"{family.kind}:{param_text}@{family.support_rule}"
