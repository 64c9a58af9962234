import itertools

import numpy as np
import pytest

from quadfun import DimensionError, lattice_ball
from quadfun.frequency import ball_array, norm_l1, norm_l2, norm_linf


class TestLatticeBall:
    def test_count_all_rule(self):
        assert len(lattice_ball(1, 2, "all")) == 9

    def test_exclude_origin_enumeration(self):
        assert lattice_ball(2, 1, "exclude_origin").members == ((-2,), (-1,), (1,), (2,))

    def test_positive_orthant(self):
        fs = lattice_ball(3, 2, "positive_orthant")
        assert len(fs) == 9
        assert all(all(1 <= c <= 3 for c in z) for z in fs.members)

    def test_counts_exhaustive(self):
        """Member counts match the closed-form formulas for zeta <= 10, D <= 3."""
        for dim in (1, 2, 3):
            for zeta in range(11):
                side = 2 * zeta + 1
                assert len(lattice_ball(zeta, dim, "all")) == side**dim
                assert len(lattice_ball(zeta, dim, "exclude_origin")) == side**dim - 1
                assert len(lattice_ball(zeta, dim, "positive_orthant")) == zeta**dim

    def test_negation_closed(self):
        for rule in ("all", "exclude_origin", "nonzero_coords"):
            members = set(lattice_ball(3, 2, rule).members)
            for z in members:
                assert tuple(-c for c in z) in members

    def test_monotone_in_zeta(self):
        for rule in ("all", "exclude_origin", "positive_orthant"):
            for zeta in range(5):
                small = set(lattice_ball(zeta, 2, rule).members)
                large = set(lattice_ball(zeta + 1, 2, rule).members)
                assert small <= large

    def test_lexicographic_order(self):
        members = lattice_ball(2, 2, "all").members
        assert list(members) == sorted(members)

    def test_dimension_errors(self):
        with pytest.raises(DimensionError):
            lattice_ball(1, 0)
        with pytest.raises(DimensionError):
            lattice_ball(1, 9)
        lattice_ball(1, 9, max_dimension=9)  # configurable cap

    def test_negative_zeta(self):
        with pytest.raises(ValueError):
            lattice_ball(-1, 1)

    def test_membership_and_array(self):
        fs = lattice_ball(2, 2, "exclude_origin")
        assert (1, -2) in fs
        assert (0, 0) not in fs
        arr = fs.coords_array()
        assert arr.shape == (len(fs), 2)
        assert [tuple(row) for row in arr] == list(fs.members)


def test_ball_array_matches_lattice_ball():
    for rule in ("all", "exclude_origin", "positive_orthant", "nonzero_coords"):
        for zeta, dim in itertools.product((0, 1, 3), (1, 2, 3)):
            fs = lattice_ball(zeta, dim, rule)
            arr = ball_array(zeta, dim, rule)
            assert [tuple(int(c) for c in row) for row in arr] == list(fs.members)


def test_norms():
    assert norm_l1((1, -2)) == 3
    assert norm_l2((3, 4)) == 5.0
    assert norm_linf((1, -2)) == 2
    assert norm_l2((0, 0)) == 0.0


def test_empty_positive_orthant_at_zeta_zero():
    assert len(lattice_ball(0, 2, "positive_orthant")) == 0
    assert ball_array(0, 2, "positive_orthant").shape == (0, 2)
