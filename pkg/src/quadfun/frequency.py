"""Integer frequency lattice: points, norms, and truncated index sets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

Frequency = tuple[int, ...]

MAX_DIMENSION = 8

SUPPORT_RULES = ("all", "exclude_origin", "positive_orthant", "nonzero_coords")

# Rules whose index sets are closed under z -> -z.
NEGATION_SYMMETRIC_RULES = ("all", "exclude_origin", "nonzero_coords")


def norm_l1(z: Frequency) -> int:
    return sum(abs(c) for c in z)


def norm_l2(z: Frequency) -> float:
    return math.sqrt(sum(c * c for c in z))


def norm_linf(z: Frequency) -> int:
    return max(abs(c) for c in z)


def passes_rule(rule: str, z: Frequency) -> bool:
    if rule == "all":
        return True
    if rule == "exclude_origin":
        return any(c != 0 for c in z)
    if rule == "positive_orthant":
        return all(c >= 1 for c in z)
    if rule == "nonzero_coords":
        return all(c != 0 for c in z)
    raise ValueError(f"unknown support rule {rule!r}")


@dataclass(frozen=True)
class FrequencySet:
    """A finite, lexicographically ordered set of lattice frequencies.

    Every member satisfies ||z||_inf <= radius and the support rule.
    Immutable; safe to share across workers.
    """

    dimension: int
    radius: int
    support_rule: str
    members: tuple[Frequency, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, z) -> bool:
        return tuple(z) in self._member_set()

    def _member_set(self):
        # Cached lazily; frozen dataclass, so stash via object.__setattr__.
        cached = getattr(self, "_cache_set", None)
        if cached is None:
            cached = frozenset(self.members)
            object.__setattr__(self, "_cache_set", cached)
        return cached

    def coords_array(self) -> np.ndarray:
        """Members as an (m, D) int64 array, in member order."""
        if not self.members:
            return np.empty((0, self.dimension), dtype=np.int64)
        return np.array(self.members, dtype=np.int64)


def _validate_dimension(dimension: int, max_dimension: int) -> None:
    if dimension < 1 or dimension > max_dimension:
        raise DimensionError(
            f"dimension must be in [1, {max_dimension}], got {dimension}"
        )


def lattice_ball(
    zeta: int,
    dimension: int,
    support_rule: str = "all",
    max_dimension: int = MAX_DIMENSION,
) -> FrequencySet:
    """All z in Z^D with ||z||_inf <= zeta passing the support rule.

    Member counts: (2*zeta+1)^D for "all", one fewer for "exclude_origin",
    zeta^D for "positive_orthant". Members come in lexicographic order of
    coordinates so that downstream sums are reproducible.
    """
    _validate_dimension(dimension, max_dimension)
    if zeta < 0:
        raise ValueError(f"zeta must be nonnegative, got {zeta}")
    if support_rule not in SUPPORT_RULES:
        raise ValueError(f"unknown support rule {support_rule!r}")
    if support_rule == "positive_orthant":
        axis = range(1, zeta + 1)
        members = tuple(itertools.product(axis, repeat=dimension))
    else:
        axis = range(-zeta, zeta + 1)
        members = tuple(
            z
            for z in itertools.product(axis, repeat=dimension)
            if passes_rule(support_rule, z)
        )
    return FrequencySet(
        dimension=dimension, radius=zeta, support_rule=support_rule, members=members
    )


def ball_array(
    zeta: int,
    dimension: int,
    support_rule: str = "all",
    max_dimension: int = MAX_DIMENSION,
) -> np.ndarray:
    """Same point set as lattice_ball, as an (m, D) int64 array in lex order.

    Used on hot paths (strength sums over large balls) where tuple
    materialization would dominate.
    """
    _validate_dimension(dimension, max_dimension)
    if zeta < 0:
        raise ValueError(f"zeta must be nonnegative, got {zeta}")
    if support_rule == "positive_orthant":
        axis = np.arange(1, zeta + 1, dtype=np.int64)
    else:
        axis = np.arange(-zeta, zeta + 1, dtype=np.int64)
    if axis.size == 0:
        return np.empty((0, dimension), dtype=np.int64)
    grids = np.meshgrid(*([axis] * dimension), indexing="ij")
    pts = np.stack(grids, axis=-1).reshape(-1, dimension)
    if support_rule == "exclude_origin":
        pts = pts[np.any(pts != 0, axis=1)]
    elif support_rule == "nonzero_coords":
        pts = pts[np.all(pts != 0, axis=1)]
    elif support_rule not in ("all", "positive_orthant"):
        raise ValueError(f"unknown support rule {support_rule!r}")
    return pts
