import math

import numpy as np
import pytest

from quadfun import (
    FrequencySet,
    bias_bound,
    fit_rate,
    lattice_ball,
    lower_bound_rate,
    minimax_rate,
    mse_bound,
    rates_match_check,
    tv_bound,
    variance_bound,
    weight_family,
)

CONST_ALL = weight_family("constant", support_rule="all")
Z16 = FrequencySet(1, 8, "all", tuple((k,) for k in range(-8, 8)))


class TestBiasBound:
    def test_equal_nets(self):
        fam = weight_family("sobolev", 1.0)
        assert bias_bound(1.0, 1.0, fam, fam, 4, 1) == pytest.approx(1.0, rel=1e-12)

    def test_sobolev_pair(self):
        a = weight_family("sobolev", 1.0)
        b = weight_family("sobolev", 2.0)
        assert bias_bound(1.0, 1.0, a, b, 10, 1) == pytest.approx(11.0**-2, rel=1e-12)

    def test_zero_norm(self):
        a = weight_family("exponential", 1.0, "all")
        b = weight_family("sobolev", 1.0, "all")  # inconsistent pair
        assert bias_bound(0.0, 5.0, a, b, 3, 1) == 0.0
        assert math.isinf(bias_bound(1.0, 1.0, a, b, 3, 1))


class TestVarianceBound:
    def test_hand_evaluated_example(self):
        got = variance_bound(1, 1, 1, 1, 1, 1, CONST_ALL, CONST_ALL, Z16, 10)
        assert got == pytest.approx(2 * 16 / 100 + 2 * 4 / 10 + 2 / 10, rel=1e-12)

    def test_large_n_limit(self):
        got = variance_bound(1, 1, 1, 1, 1, 1, CONST_ALL, CONST_ALL, Z16, 10**6)
        expected = 2 * 16 / 1e12 + 2 * 4 / 1e6 + 2 / 1e6
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(1.0e-5, rel=2e-1)

    def test_zero_norms(self):
        assert variance_bound(0, 0, 0, 0, 0, 0, CONST_ALL, CONST_ALL, Z16, 10) == 0.0

    def test_empty_set_keeps_only_last_term(self):
        Z0 = lattice_ball(0, 1, "exclude_origin")
        a = weight_family("constant", support_rule="exclude_origin")
        got = variance_bound(1, 1, 1, 1, 2, 3, a, a, Z0, 10)
        assert got == pytest.approx(2 * 4 * 9 / 10, rel=1e-12)

    def test_monotone_in_n_and_norms(self):
        a = weight_family("sobolev", 1.0)
        b = weight_family("sobolev", 2.0)
        Z = lattice_ball(3, 1, "exclude_origin")
        base = [1.0] * 6
        vals_n = [variance_bound(*base, a, b, Z, n) for n in (5, 10, 100, 1000)]
        assert all(v2 <= v1 for v1, v2 in zip(vals_n, vals_n[1:]))
        for idx in range(6):
            lo = list(base)
            hi = list(base)
            hi[idx] = 2.0
            assert variance_bound(*hi, a, b, Z, 10) >= variance_bound(*lo, a, b, Z, 10)


class TestMseBound:
    def test_hand_evaluated_example(self):
        got = mse_bound(1, 1, 1, 1, 1, 1, CONST_ALL, CONST_ALL, Z16, 10)
        assert got == pytest.approx(1.0 + 1.32, rel=1e-12)

    def test_norm_mode_collapse(self):
        a = weight_family("sobolev", 1.0)
        b = weight_family("sobolev", 2.0)
        Z = lattice_ball(2, 1, "exclude_origin")
        collapsed = mse_bound(1.5, 99, 0.7, 99, 1.1, 99, a, b, Z, 50, norm_mode=True)
        explicit = mse_bound(1.5, 1.5, 0.7, 0.7, 1.1, 1.1, a, b, Z, 50)
        assert collapsed == explicit

    def test_norm_mode_zero_smoothness_norm(self):
        a = weight_family("sobolev", 1.0)
        b = weight_family("sobolev", 2.0)
        Z = lattice_ball(2, 1, "exclude_origin")
        got = mse_bound(1.0, 99, 0.0, 99, 0.0, 99, a, b, Z, 10, norm_mode=True)
        inv4 = sum(float(k) ** 4 for k in (-2, -1, 1, 2))
        assert got == pytest.approx(2 * 1.0 / 100 * inv4, rel=1e-12)

    def test_inconsistent_pair_is_infinite(self):
        a = weight_family("exponential", 1.0, "all")
        b = weight_family("sobolev", 2.0, "all")
        Z = lattice_ball(2, 1, "all")
        assert math.isinf(mse_bound(1, 1, 1, 1, 1, 1, a, b, Z, 10))

    def test_monotone_in_n(self):
        a = weight_family("sobolev", 1.0)
        b = weight_family("sobolev", 2.0)
        Z = lattice_ball(3, 1, "exclude_origin")
        vals = [mse_bound(1, 1, 1, 1, 1, 1, a, b, Z, n) for n in (5, 50, 500)]
        assert all(v2 <= v1 for v1, v2 in zip(vals, vals[1:]))


class TestMinimaxRate:
    def test_sobolev_nonparametric(self):
        pred = minimax_rate(weight_family("sobolev", 1.0), weight_family("sobolev", 1.5), 1)
        assert pred.exponent == pytest.approx(-4.0 / 7.0, rel=1e-12)
        assert pred.regime == "nonparametric"

    def test_gaussian_parametric_elbow(self):
        pred = minimax_rate(
            weight_family("gaussian", 1.0, "all"), weight_family("gaussian", 4.0, "all"), 1
        )
        assert pred.exponent == -1.0 and pred.regime == "parametric"
        boundary = minimax_rate(
            weight_family("gaussian", 1.0, "all"), weight_family("gaussian", 2.0, "all"), 1
        )
        assert boundary.exponent == -1.0 and boundary.regime == "parametric"

    def test_inconsistent_cell(self):
        pred = minimax_rate(
            weight_family("exponential", 1.0, "all"), weight_family("sobolev", 2.0, "all"), 1
        )
        assert pred.inconsistent and pred.regime == "inconsistent"

    def test_log_log_upper_bound_only(self):
        pred = minimax_rate(
            weight_family("logarithmic", 1.0), weight_family("logarithmic", 2.0), 1
        )
        assert pred.regime == "upper_bound_only"
        assert pred.exponent == pytest.approx(-4.0)

    def test_sinc_is_parametric(self):
        pred = minimax_rate(weight_family("sinc", 3), weight_family("sobolev", 1.0, "all"), 1)
        assert pred.exponent == -1.0 and pred.regime == "parametric"

    def test_monotone_in_s_and_t(self):
        grid = [0.25 * k for k in range(1, 17)]
        for kind in ("sobolev", "gaussian", "exponential"):
            for t in grid:
                exps = []
                for s in grid:
                    if s > t:
                        continue
                    pred = minimax_rate(
                        weight_family(kind, s, "exclude_origin"),
                        weight_family(kind, t, "exclude_origin"),
                        1,
                    )
                    exps.append(pred.exponent)
                assert all(e2 >= e1 for e1, e2 in zip(exps, exps[1:]))
            for s in grid:
                exps = []
                for t in grid:
                    if t < s:
                        continue
                    pred = minimax_rate(
                        weight_family(kind, s, "exclude_origin"),
                        weight_family(kind, t, "exclude_origin"),
                        1,
                    )
                    exps.append(pred.exponent)
                assert all(e2 <= e1 for e1, e2 in zip(exps, exps[1:]))


class TestLowerBoundRate:
    def test_equal_nets_constant_rate(self):
        fam = weight_family("sobolev", 1.0)
        assert lower_bound_rate(fam, fam, 1000, 1) == 1.0

    def test_slope_matches_table_exponent(self):
        a = weight_family("sobolev", 1.0)
        b = weight_family("sobolev", 1.5)
        ns = [10**k for k in range(3, 9)]
        vals = [lower_bound_rate(a, b, n, 1) for n in ns]
        slope, _, _ = fit_rate(list(zip(ns, vals)))
        assert abs(slope - (-4.0 / 7.0)) <= 0.05

    def test_weak_smoothness_uses_fallback_branch(self):
        a = weight_family("constant", support_rule="all")
        b = weight_family("constant", support_rule="all")
        n = 100
        got = lower_bound_rate(a, b, n, 1)
        zeta_u = math.ceil(n ** (2.0 / 3.0))
        strength_u = 2 * zeta_u + 1
        assert got == pytest.approx(
            max(strength_u**2 / n ** (8.0 / 3.0), 1.0 / n), rel=1e-12
        )


class TestTvBound:
    def test_zero_amplitude(self):
        assert tv_bound(100, 0.0, 5, 1) == 0.0

    def test_unit_case(self):
        assert tv_bound(1, 1.0, 1, 2) == pytest.approx(math.e - 1, rel=1e-12)

    def test_inversion(self):
        c = math.sqrt(math.log(1.5))
        assert tv_bound(1, c, 1, 2) == pytest.approx(0.5, rel=1e-12)

    def test_overflow(self):
        assert math.isinf(tv_bound(10**9, 10.0, 100, 2))


class TestRatesMatch:
    def test_identical_nets(self):
        fam = weight_family("sobolev", 1.0)
        report = rates_match_check(fam, fam, 1, [2, 4, 8])
        assert report.match
        assert all(r.ratio_bias_vs_gap == pytest.approx(1.0, rel=1e-12) for r in report.rows)

    def test_sobolev_pair_matches(self):
        report = rates_match_check(
            weight_family("sobolev", 1.0), weight_family("sobolev", 2.0), 1,
            [4, 8, 16, 32, 64],
        )
        assert report.match

    def test_constant_nets_match(self):
        fam = weight_family("constant", support_rule="all")
        report = rates_match_check(fam, fam, 1, [2, 8, 32])
        assert report.match
        for row in report.rows:
            count = 2 * row.zeta + 1
            assert row.ratio_balance == pytest.approx(count / row.zeta, rel=1e-12)
