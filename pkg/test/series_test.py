import math

import numpy as np
import pytest

from fertcast.exceptions import (
    DegenerateSeriesException,
    FertcastException,
    RegionMismatchException,
)
from fertcast.models.series_models import (
    FertilityVariable,
    RegionSeries,
    ZScoredSeries,
)
from fertcast.series import (
    fertility_intensity,
    pearson_r,
    prediction_correlation,
    zscore,
    zscore_vector,
)


class TestFertilityIntensity:
    def test_round_numbers(self):
        variable = FertilityVariable("Gen", births={"A": 54}, women_15_50={"A": 1000})
        assert fertility_intensity(variable).values == {"A": 54.0}

    def test_zero_births(self):
        variable = FertilityVariable("Gen", births={"A": 0}, women_15_50={"A": 500})
        assert fertility_intensity(variable).values == {"A": 0.0}

    def test_homogeneity(self):
        births = {"A": 30.0, "B": 41.0, "C": 12.0}
        women = {"A": 800.0, "B": 1200.0, "C": 300.0}
        base = fertility_intensity(FertilityVariable("Gen", births, women))
        doubled = fertility_intensity(
            FertilityVariable(
                "Gen",
                {key: 2 * value for key, value in births.items()},
                {key: 2 * value for key, value in women.items()},
            )
        )
        double_scale = fertility_intensity(FertilityVariable("Gen", births, women), 2000)
        for region in births:
            assert doubled.values[region] == pytest.approx(base.values[region], rel=1e-12)
            assert double_scale.values[region] == pytest.approx(
                2 * base.values[region], rel=1e-12
            )

    def test_missing_denominator_region(self):
        variable = FertilityVariable(
            "Gen", births={"A": 1, "US-NY": 2}, women_15_50={"A": 10}
        )
        with pytest.raises(RegionMismatchException) as err:
            fertility_intensity(variable)
        assert err.value.difference == {"US-NY"}

    def test_zero_denominator(self):
        variable = FertilityVariable("Gen", births={"A": 1}, women_15_50={"A": 0})
        with pytest.raises(FertcastException):
            fertility_intensity(variable)

    def test_negative_births_rejected(self):
        with pytest.raises(FertcastException):
            FertilityVariable("Gen", births={"A": -1}, women_15_50={"A": 10})


class TestZscore:
    def test_three_values(self):
        result = zscore_vector([1, 2, 3])
        expected = [-1.224744871391589, 0.0, 1.224744871391589]
        assert result == pytest.approx(expected, abs=1e-12)

    def test_constant_is_degenerate(self):
        with pytest.raises(DegenerateSeriesException):
            zscore_vector([5, 5, 5])

    def test_single_value_is_degenerate(self):
        with pytest.raises(DegenerateSeriesException):
            zscore_vector([5])

    def test_series_keeps_regions(self):
        series = RegionSeries("Gen", {"C": 3.0, "A": 1.0, "B": 2.0})
        result = zscore(series)
        assert isinstance(result, ZScoredSeries)
        assert result.regions == ("A", "B", "C")
        assert result.values["B"] == pytest.approx(0.0, abs=1e-15)
        assert result.check_normalized()

    def test_random_vectors_are_normalized(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            vector = rng.normal(loc=rng.uniform(-100, 100), scale=rng.uniform(0.1, 10), size=51)
            result = zscore_vector(vector)
            assert abs(result.mean()) <= 1e-9
            assert abs(result.std() - 1.0) <= 1e-9

    def test_affine_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            vector = rng.normal(size=20)
            scale = rng.uniform(0.01, 100.0)
            offset = rng.uniform(-1000.0, 1000.0)
            assert zscore_vector(scale * vector + offset) == pytest.approx(
                zscore_vector(vector), abs=1e-9
            )

    def test_sample_divisor(self):
        result = zscore_vector([1, 2, 3], ddof=1)
        assert result == pytest.approx([-1.0, 0.0, 1.0], abs=1e-12)


class TestPearson:
    def test_exact_positive(self):
        assert pearson_r([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-12)

    def test_exact_negative(self):
        assert pearson_r([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_computation(self):
        assert pearson_r([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(FertcastException):
            pearson_r([1, 2, 3], [1, 2])

    def test_constant_input(self):
        with pytest.raises(DegenerateSeriesException):
            pearson_r([1, 2, 3], [4, 4, 4])

    def test_properties_on_random_inputs(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = rng.normal(size=30)
            b = rng.normal(size=30)
            value = pearson_r(a, b)
            assert value == pearson_r(b, a)
            assert abs(value) <= 1.0 + 1e-12
            assert value == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-10)
            assert value == pytest.approx(
                float(np.dot(zscore_vector(a), zscore_vector(b)) / a.size), abs=1e-10
            )
            factor = rng.uniform(0.1, 5.0) * (1 if rng.random() < 0.5 else -1)
            assert pearson_r(a, a * factor + 3.0) == pytest.approx(
                math.copysign(1.0, factor), abs=1e-12
            )

    def test_series_alignment(self):
        a = RegionSeries("a", {"A": 1.0, "B": 2.0, "C": 3.0})
        b = RegionSeries("b", {"C": 6.0, "B": 4.0, "A": 2.0})
        assert pearson_r(a.vector(a.regions), b.vector(a.regions)) == pytest.approx(1.0, abs=1e-12)


class TestPredictionCorrelation:
    def test_flat_prediction_is_zero(self):
        assert prediction_correlation([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]) == 0.0

    def test_perfect_prediction(self):
        assert prediction_correlation([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == pytest.approx(1.0)

    def test_leave_one_out_means_are_anti_correlated(self):
        assert prediction_correlation([2.5, 2.0, 1.5], [1.0, 2.0, 3.0]) == pytest.approx(-1.0)


class TestRegionSeries:
    def test_non_finite_rejected(self):
        with pytest.raises(FertcastException):
            RegionSeries("x", {"A": float("nan")})

    def test_values_are_read_only(self):
        series = RegionSeries("x", {"A": 1.0})
        with pytest.raises(TypeError):
            series.values["A"] = 2.0

    def test_vector_order_mismatch(self):
        series = RegionSeries("x", {"A": 1.0, "B": 2.0})
        with pytest.raises(RegionMismatchException):
            series.vector(["A", "C"])

    def test_minimum_regions(self):
        with pytest.raises(FertcastException):
            RegionSeries("x", {"A": 1.0, "B": 2.0}).validate_regions()
