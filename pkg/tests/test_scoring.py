"""Scores, expected-score surfaces, argmin intervals, forecast comparison."""

import dataclasses
import math

import numpy as np
import pytest

from elicitrisk import (
    ArgminInterval,
    Empirical,
    ExpectileScore,
    ForecastSeries,
    IdentityGenerator,
    MethodScore,
    QuantileScore,
    SquaredGenerator,
    TabulatedGenerator,
    Uniform,
    argmin_expected_score,
    compare,
    dirac,
    expectile,
    two_point,
)

from helpers import random_atomic


def uniform_midpoint_empirical(a, b, n=200_000):
    # midpoint discretization, an independent oracle for the closed forms
    k = np.arange(n)
    return Empirical(a + (b - a) * (k + 0.5) / n)


class TestScoreValues:
    def test_pinball_examples(self):
        s = QuantileScore(0.25)
        assert s.score(3.0, 2.0) == 0.75
        assert s.score(1.0, 2.0) == 0.25
        assert s.score(2.0, 2.0) == 0.0

    def test_pinball_asymmetry(self):
        a = 0.1
        s = QuantileScore(a)
        y = 1.0
        assert s.score(y - 1.0, y) == pytest.approx(a)
        assert s.score(y + 1.0, y) == pytest.approx(1.0 - a)

    def test_expectile_squared_examples(self):
        s = ExpectileScore(0.3)
        assert s.score(0.0, 1.0) == pytest.approx(0.3)
        assert s.score(2.0, 1.0) == pytest.approx(0.7)
        assert s.score(1.0, 1.0) == 0.0

    def test_expectile_half_symmetric(self):
        s = ExpectileScore(0.5)
        assert s.score(0.0, 1.0) == s.score(2.0, 1.0) == 0.5

    def test_scalar_in_scalar_out(self):
        assert isinstance(QuantileScore(0.4).score(1.0, 2.0), float)
        assert isinstance(ExpectileScore(0.4).score(1.0, 2.0), float)

    def test_broadcasting(self):
        s = QuantileScore(0.5)
        out = s.score(np.array([0.0, 1.0, 2.0]), 1.0)
        assert out.shape == (3,)
        assert out[1] == 0.0

    def test_nonnegative_everywhere(self):
        rng = np.random.default_rng(12)
        x = rng.uniform(-50.0, 50.0, 100_000)
        y = rng.uniform(-50.0, 50.0, 100_000)
        assert np.all(QuantileScore(0.3).score(x, y) >= 0.0)
        assert np.all(ExpectileScore(0.7).score(x, y) >= 0.0)
        gen = TabulatedGenerator([(-60.0, 0.0), (0.0, 30.0), (60.0, 120.0)])
        # interpolation rounding can undershoot zero by a few ulps of the
        # knot scale, so the piecewise-linear case gets a tiny allowance
        assert np.all(QuantileScore(0.3, gen).score(x, y) >= -1e-10)
        assert np.all(ExpectileScore(0.7, generator=gen).score(x, y) >= -1e-10)


class TestExpectedScore:
    def test_two_point_by_hand(self):
        d = two_point(0.0, 1.0, 0.5)
        s = QuantileScore(0.5)
        # 0.5 * (0.5 * 0.25) + 0.5 * (0.5 * 0.75)
        assert s.expected_score(0.25, d) == pytest.approx(0.25, abs=1e-15)

    def test_dirac_reduces_to_score(self):
        s = ExpectileScore(0.4)
        assert s.expected_score(1.7, dirac(0.2)) == s.score(1.7, 0.2)
        assert s.expected_score(0.2, dirac(0.2)) == 0.0

    def test_minimized_at_functional_value(self):
        d = Empirical([-2.0, 0.0, 1.0, 3.0])
        q = QuantileScore(0.5)
        med = d.quantile(0.5)
        assert q.expected_score(med, d) <= q.expected_score(med - 0.4, d)
        assert q.expected_score(med, d) <= q.expected_score(med + 0.4, d)
        e = ExpectileScore(0.5)
        m = d.mean()
        assert e.expected_score(m, d) < e.expected_score(m - 0.3, d)
        assert e.expected_score(m, d) < e.expected_score(m + 0.3, d)

    def test_vector_forecasts(self):
        d = Empirical([0.0, 1.0])
        out = QuantileScore(0.5).expected_score(np.array([0.2, 0.5]), d)
        assert out.shape == (2,)


class TestUniformClosedForms:
    def test_quantile_interior_matches_discretization(self):
        d = Uniform(-1.0, 2.0)
        emp = uniform_midpoint_empirical(-1.0, 2.0)
        s = QuantileScore(0.35)
        for x in (-0.8, 0.0, 0.7, 1.9):
            assert s.expected_score(x, d) == pytest.approx(
                s.expected_score(x, emp), abs=1e-8)

    def test_quantile_linear_tails(self):
        d = Uniform(0.0, 1.0)
        s = QuantileScore(0.2)
        # below the support the pinball integrand is linear in x
        assert s.expected_score(-2.0, d) == pytest.approx(0.2 * (0.5 + 2.0), abs=1e-14)
        assert s.expected_score(2.5, d) == pytest.approx(0.8 * 2.0, abs=1e-14)

    def test_quantile_continuous_at_edges(self):
        d = Uniform(0.0, 1.0)
        s = QuantileScore(0.2)
        for edge in (0.0, 1.0):
            v = s.expected_score(edge, d)
            assert s.expected_score(edge - 1e-9, d) == pytest.approx(v, abs=1e-8)
            assert s.expected_score(edge + 1e-9, d) == pytest.approx(v, abs=1e-8)

    def test_expectile_matches_discretization(self):
        d = Uniform(-1.0, 2.0)
        emp = uniform_midpoint_empirical(-1.0, 2.0)
        s = ExpectileScore(0.65)
        for x in (-1.5, -0.4, 0.5, 1.8, 2.3):
            assert s.expected_score(x, d) == pytest.approx(
                s.expected_score(x, emp), abs=1e-7)

    def test_expectile_minimum_at_mean_when_symmetric(self):
        d = Uniform(0.0, 1.0)
        s = ExpectileScore(0.5)
        assert s.expected_score(0.5, d) < s.expected_score(0.3, d)
        assert s.expected_score(0.5, d) < s.expected_score(0.7, d)

    def test_unsupported_combinations_raise(self):
        gen = TabulatedGenerator([(-10.0, 0.0), (0.0, 5.0), (10.0, 20.0)])
        with pytest.raises(NotImplementedError):
            QuantileScore(0.3, gen).expected_score(0.5, Uniform(0.0, 1.0))
        with pytest.raises(NotImplementedError):
            ExpectileScore(0.3, generator=gen).expected_score(0.5, Uniform(0.0, 1.0))


class TestGeneratorRules:
    def test_quantile_needs_monotone_generator(self):
        with pytest.raises(ValueError, match="nondecreasing"):
            QuantileScore(0.3, SquaredGenerator())
        with pytest.raises(ValueError, match="nondecreasing"):
            QuantileScore(0.3, TabulatedGenerator([(0.0, 0.0), (1.0, -1.0)]))

    def test_expectile_needs_convex_generator(self):
        concave = TabulatedGenerator([(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)])
        with pytest.raises(ValueError, match="convex"):
            ExpectileScore(0.3, generator=concave)

    def test_expectile_rejects_identity(self):
        with pytest.raises(ValueError, match="identity generator"):
            ExpectileScore(0.3, generator=IdentityGenerator())

    def test_level_validation(self):
        for bad in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                QuantileScore(bad)
            with pytest.raises(ValueError):
                ExpectileScore(bad)


class TestTabulatedGenerator:
    def test_validation(self):
        with pytest.raises(ValueError, match="two knots"):
            TabulatedGenerator([(0.0, 0.0)])
        with pytest.raises(ValueError, match="strictly increasing"):
            TabulatedGenerator([(0.0, 0.0), (0.0, 1.0)])
        with pytest.raises(ValueError, match="finite"):
            TabulatedGenerator([(0.0, 0.0), (1.0, float("inf"))])

    def test_interpolation_and_extension(self):
        g = TabulatedGenerator([(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)])
        assert g(0.5) == 0.5
        assert g(1.5) == 2.0
        assert g(1.0) == 1.0
        # end segments extend with their own slopes
        assert g(-1.0) == -1.0
        assert g(3.0) == 5.0

    def test_one_sided_derivative_at_knot(self):
        g = TabulatedGenerator([(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)])
        assert g.derivative(1.0, side="left") == 1.0
        assert g.derivative(1.0, side="right") == 2.0
        assert g.derivative(0.5, side="left") == g.derivative(0.5, side="right") == 1.0

    def test_shape_flags(self):
        g = TabulatedGenerator([(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)])
        assert g.is_nondecreasing and g.is_strictly_increasing and g.is_convex
        flat = TabulatedGenerator([(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)])
        assert flat.is_nondecreasing and not flat.is_strictly_increasing


class TestArgmin:
    def test_expectile_pinpoints_solution(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            d = random_atomic(rng)
            for tau in (0.2, 0.5, 0.8):
                r = argmin_expected_score(ExpectileScore(tau), d)
                assert r.hi - r.lo <= 1e-9
                assert abs(r.midpoint - expectile(d, tau).mu) <= 1e-6

    def test_quantile_unique_minimizer(self):
        d = Empirical([1.0, 2.0, 3.0])
        r = argmin_expected_score(QuantileScore(0.5), d)
        assert r.lo == pytest.approx(2.0, abs=1e-9)
        assert r.hi == pytest.approx(2.0, abs=1e-9)

    def test_quantile_flat_stretch(self):
        # F(1) hits 1/3 exactly, so every point of [1, 2] minimizes
        d = Empirical([1.0, 2.0, 3.0])
        r = argmin_expected_score(QuantileScore(1.0 / 3.0), d)
        assert r.lo == pytest.approx(1.0, abs=1e-9)
        assert r.hi == pytest.approx(2.0, abs=1e-9)
        assert r.contains(1.5)

    def test_two_point_median_interval(self):
        r = argmin_expected_score(QuantileScore(0.5), two_point(0.0, 1.0, 0.5))
        assert r.lo == pytest.approx(0.0, abs=1e-9)
        assert r.hi == pytest.approx(1.0, abs=1e-9)

    def test_uniform_both_scores(self):
        d = Uniform(0.0, 1.0)
        rq = argmin_expected_score(QuantileScore(0.3), d)
        assert abs(rq.midpoint - 0.3) <= 1e-9
        re = argmin_expected_score(ExpectileScore(0.5), d)
        assert abs(re.midpoint - 0.5) <= 1e-8

    def test_value_is_expected_score_at_midpoint(self):
        d = Empirical([0.0, 2.0, 5.0])
        s = QuantileScore(0.25)
        r = argmin_expected_score(s, d)
        assert r.value == s.expected_score(r.midpoint, d)

    def test_flat_piecewise_linear_interval_reported_honestly(self):
        # a single-segment generator has zero Bregman divergence, so the
        # expected score is identically zero and the whole bracket minimizes
        gen = TabulatedGenerator([(0.0, 0.0), (5.0, 25.0)])
        d = Empirical([0.5, 3.0])
        r = argmin_expected_score(ExpectileScore(0.5, generator=gen), d)
        assert r.lo == 0.0
        assert r.hi == 3.5
        assert r.value <= 1e-12

    def test_custom_bracket(self):
        d = Empirical([1.0, 2.0, 3.0])
        r = argmin_expected_score(QuantileScore(0.5), d, bracket=(1.9, 2.1))
        assert r.lo >= 1.9 and r.hi <= 2.1

    def test_validation(self):
        d = Empirical([1.0, 2.0])
        with pytest.raises(ValueError, match="bracket"):
            argmin_expected_score(QuantileScore(0.5), d, bracket=(2.0, 2.0))
        gen = TabulatedGenerator([(-10.0, 10.0), (0.0, 0.0), (10.0, 10.0)])
        with pytest.raises(ValueError, match="grid_points"):
            argmin_expected_score(ExpectileScore(0.5, generator=gen), d, grid_points=2)

    def test_frozen_interval(self):
        r = ArgminInterval(lo=0.0, hi=1.0, value=0.5)
        assert r.midpoint == 0.5
        assert r.contains(1.0) and not r.contains(1.1)
        assert r.contains(1.1, slack=0.2)
        with pytest.raises(dataclasses.FrozenInstanceError):
            r.lo = 2.0


class TestConsistency:
    """The argmin interval must beat every other forecast, and strictly so
    away from the flat stretch."""

    def test_quantile(self):
        rng = np.random.default_rng(14)
        for _ in range(25):
            d = random_atomic(rng)
            s = QuantileScore(float(rng.uniform(0.1, 0.9)))
            r = argmin_expected_score(s, d)
            for t in np.linspace(d.support_min() - 0.5, d.support_max() + 0.5, 41):
                assert r.value <= s.expected_score(float(t), d) + 1e-12
            assert s.expected_score(r.hi + 0.6, d) > r.value
            assert s.expected_score(r.lo - 0.6, d) > r.value

    def test_expectile(self):
        rng = np.random.default_rng(15)
        for _ in range(25):
            d = random_atomic(rng)
            s = ExpectileScore(float(rng.uniform(0.1, 0.9)))
            r = argmin_expected_score(s, d)
            for t in np.linspace(d.support_min() - 0.5, d.support_max() + 0.5, 41):
                assert r.value <= s.expected_score(float(t), d) + 1e-12
            assert s.expected_score(r.hi + 0.6, d) > r.value
            assert s.expected_score(r.lo - 0.6, d) > r.value


class TestForecastSeries:
    def test_from_arrays(self):
        fs = ForecastSeries.from_arrays({"a": [1.0, 2.0], "b": [0.0, 0.0]}, [1.0, 3.0])
        assert fs.periods == ["1", "2"]
        assert fs.methods == ["a", "b"]
        assert list(fs.realization_vector()) == [1.0, 3.0]
        assert list(fs.forecast_vector("b")) == [0.0, 0.0]

    def test_validation(self):
        with pytest.raises(ValueError, match="at least one period"):
            ForecastSeries([], {}, {"a": {}})
        with pytest.raises(ValueError, match="distinct"):
            ForecastSeries(["1", "1"], {"1": 0.0}, {"a": {"1": 0.0}})
        with pytest.raises(ValueError, match="no realization"):
            ForecastSeries(["1"], {}, {"a": {"1": 0.0}})
        with pytest.raises(ValueError, match="missing periods"):
            ForecastSeries(["1", "2"], {"1": 0.0, "2": 0.0}, {"a": {"1": 0.0}})
        with pytest.raises(ValueError, match="at least one method"):
            ForecastSeries(["1"], {"1": 0.0}, {})
        with pytest.raises(ValueError, match="2 forecasts"):
            ForecastSeries.from_arrays({"a": [1.0, 2.0]}, [1.0, 2.0, 3.0])

    def test_from_csv(self, tmp_path):
        f = tmp_path / "panel.csv"
        f.write_text(
            "method,period,forecast,realization\n"
            "a,t1,0.5,1.0\n"
            "a,t2,0.7,2.0\n"
            "b,t1,1.0,1.0\n"
            "b,t2,2.0,2.0\n")
        fs = ForecastSeries.from_csv(f)
        assert fs.periods == ["t1", "t2"]
        assert fs.methods == ["a", "b"]
        assert list(fs.forecast_vector("a")) == [0.5, 0.7]

    def test_from_csv_errors(self, tmp_path):
        cases = [
            ("method,period,forecast\na,t1,0.5\n", "needs columns"),
            ("method,period,forecast,realization\na,t1,0.5,1.0\n,t2,0.7,2.0\n",
             "line 3: empty method"),
            ("method,period,forecast,realization\na,t1,oops,1.0\n", "must be numbers"),
            ("method,period,forecast,realization\na,t1,0.5,1.0\nb,t1,0.6,9.0\n",
             "conflicting"),
            ("method,period,forecast,realization\na,t1,0.5,1.0\na,t1,0.6,1.0\n",
             "duplicate forecast"),
        ]
        for body, msg in cases:
            f = tmp_path / "bad.csv"
            f.write_text(body)
            with pytest.raises(ValueError, match=msg):
                ForecastSeries.from_csv(f)


class TestCompare:
    def test_perfect_forecaster_wins(self):
        y = [1.0, 2.0, 3.0, 4.0]
        fs = ForecastSeries.from_arrays(
            {"oracle": y, "biased": [v + 1.0 for v in y]}, y)
        out = compare(fs, QuantileScore(0.25))
        assert out[0] == MethodScore(method="oracle", mean_score=0.0, rank=1)
        assert out[1].method == "biased"
        assert out[1].mean_score == pytest.approx(0.75)
        assert out[1].rank == 2

    def test_competition_ranks_on_ties(self):
        y = [1.0, 2.0]
        fs = ForecastSeries.from_arrays(
            {"m2": [0.0, 1.0], "m1": [0.0, 1.0], "worse": [5.0, 5.0]}, y)
        out = compare(fs, QuantileScore(0.5))
        assert [(m.method, m.rank) for m in out] == [("m1", 1), ("m2", 1), ("worse", 3)]
        assert out[0].mean_score == out[1].mean_score

    def test_period_order_does_not_change_means(self):
        rng = np.random.default_rng(16)
        y = rng.uniform(-5.0, 5.0, 200).tolist()
        x = rng.uniform(-5.0, 5.0, 200).tolist()
        a = compare(ForecastSeries.from_arrays({"m": x}, y), QuantileScore(0.3))
        b = compare(ForecastSeries.from_arrays({"m": x[::-1]}, y[::-1]), QuantileScore(0.3))
        # compensated summation makes the mean exact, hence order-independent
        assert a[0].mean_score == b[0].mean_score

    def test_expectile_ranking_runs(self):
        y = [0.0, 1.0, -1.0, 2.0]
        fs = ForecastSeries.from_arrays(
            {"near": [0.1, 0.9, -0.8, 1.7], "far": [3.0, 3.0, 3.0, 3.0]}, y)
        out = compare(fs, ExpectileScore(0.5))
        assert [m.method for m in out] == ["near", "far"]
        assert all(m.mean_score >= 0.0 for m in out)
        assert [m.rank for m in out] == [1, 2]

    def test_method_score_frozen(self):
        ms = MethodScore(method="a", mean_score=0.0, rank=1)
        with pytest.raises(dataclasses.FrozenInstanceError):
            ms.rank = 2
