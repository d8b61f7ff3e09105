import math

import numpy as np
import pytest

from fertcast import constants
from fertcast.evaluation import (
    choose_model,
    compute_metrics,
    loocv,
    predictive_r,
    recompute_metrics,
    rmse,
    smape,
)
from fertcast.exceptions import FertcastException, FoldFitException
from fertcast.models.evaluation_models import EvaluationReport, HeldOutPrediction, Metrics
from fertcast.models.regression_models import DesignMatrix, FamilySpec, LassoConfig
from fertcast.models.series_models import RegionSeries
from fertcast.regression import fit_family, predict
from fertcast.series import zscore_vector

_SMALL_LASSO = LassoConfig(grid_size=5, ratio=1e-2)


def _regions(count):
    return tuple(f"R{index:02d}" for index in range(count))


def _design(values, columns=None):
    values = np.asarray(values, dtype=float)
    columns = columns or [f"t{index}" for index in range(values.shape[1])]
    return DesignMatrix(_regions(values.shape[0]), tuple(columns), values)


def _target(vector, name="Gen"):
    return RegionSeries.from_vector(name, _regions(len(vector)), vector)


def _zscored_columns(rng, n_rows, n_columns):
    return np.column_stack(
        [zscore_vector(rng.normal(size=n_rows)) for _ in range(n_columns)]
    )


def _report(family, r, rmse_value=1.0):
    return EvaluationReport(
        variable="Gen",
        family=family,
        held_out={"A": HeldOutPrediction(1.0, 1.0)},
        metrics=Metrics(r=r, rmse=rmse_value, smape_pct=0.0),
    )


def _naive_loocv(x: DesignMatrix, y: RegionSeries, spec: FamilySpec):
    predictions = []
    for region in x.rows:
        keep = [row for row in x.rows if row != region]
        train_x = DesignMatrix(
            tuple(keep),
            x.columns,
            np.array([x.values[x.rows.index(row)] for row in keep]),
        )
        train_y = RegionSeries("Gen", {row: y.values[row] for row in keep})
        model = fit_family(spec, train_x, train_y)
        held_out = DesignMatrix(
            (region,), x.columns, x.values[x.rows.index(region)][None, :]
        )
        predictions.append(predict(model, held_out).values[region])
    return predictions


class TestMetrics:
    def test_rmse(self):
        assert rmse([0, 0], [3, 4]) == pytest.approx(3.5355339059327378, abs=1e-9)
        assert rmse([1, 2, 3], [1, 2, 3]) == 0.0

    def test_rmse_homogeneity(self):
        assert rmse([0, 0], [3000, 4000]) == pytest.approx(1000 * rmse([0, 0], [3, 4]))

    def test_smape(self):
        assert smape([3], [1]) == pytest.approx(50.0, abs=1e-9)
        assert smape([2, 5], [2, 5]) == 0.0
        assert smape([1], [-1]) == pytest.approx(100.0)

    def test_smape_zero_pair(self):
        assert smape([0.0, 3.0], [0.0, 1.0]) == pytest.approx(25.0)

    def test_metric_properties(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            predicted = rng.uniform(1, 100, size=12)
            truth = rng.uniform(1, 100, size=12)
            permutation = rng.permutation(12)
            assert rmse(predicted[permutation], truth[permutation]) == pytest.approx(
                rmse(predicted, truth)
            )
            assert smape(predicted[permutation], truth[permutation]) == pytest.approx(
                smape(predicted, truth)
            )
            factor = rng.uniform(0.1, 10)
            assert smape(factor * predicted, factor * truth) == pytest.approx(
                smape(predicted, truth)
            )
            assert rmse(-factor * predicted, -factor * truth) == pytest.approx(
                factor * rmse(predicted, truth)
            )
            assert 0.0 <= smape(predicted, truth) <= 100.0

    def test_length_mismatch(self):
        with pytest.raises(FertcastException):
            rmse([1, 2], [1])
        with pytest.raises(FertcastException):
            smape([], [])


class TestLoocv:
    def test_three_region_constant(self):
        x = DesignMatrix(("A", "B", "C"), (), np.zeros((3, 0)))
        y = RegionSeries("Gen", {"A": 1.0, "B": 2.0, "C": 3.0})
        report = loocv(x, y, FamilySpec(family=constants.MODEL_FAMILY_CONSTANT))
        assert {region: pair.prediction for region, pair in report.held_out.items()} == {
            "A": 2.5,
            "B": 2.0,
            "C": 1.5,
        }
        # Leave-one-out means are a decreasing affine function of the truth
        assert report.metrics.r == pytest.approx(-1.0)
        assert predictive_r(report) == report.metrics.r

    def test_noiseless_linear_signal(self):
        rng = np.random.default_rng(2)
        x = _design(_zscored_columns(rng, 12, 2))
        y = _target(3.0 * x.values[:, 0] - x.values[:, 1] + 50.0)
        report = loocv(x, y, FamilySpec(family=constants.MODEL_FAMILY_OLS_MULTI))
        assert report.metrics.r == pytest.approx(1.0, abs=1e-9)
        assert report.metrics.rmse == pytest.approx(0.0, abs=1e-9)
        assert report.metrics.smape_pct == pytest.approx(0.0, abs=1e-9)

    def test_constant_against_hand_rolled_folds(self):
        values = [3.0, 7.0, 4.0, 9.0, 2.0]
        x = _design(np.zeros((5, 0)), [])
        report = loocv(x, _target(values), FamilySpec(family=constants.MODEL_FAMILY_CONSTANT))
        expected = [
            sum(values[:index] + values[index + 1 :]) / 4.0 for index in range(5)
        ]
        assert report.predictions == pytest.approx(expected, abs=1e-12)
        assert report.metrics.rmse == pytest.approx(
            math.sqrt(sum((p - t) ** 2 for p, t in zip(expected, values)) / 5.0)
        )

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(3)
        for instance in range(20):
            n_rows = int(rng.integers(5, 11))
            x = _design(_zscored_columns(rng, n_rows, 2))
            y = _target(rng.normal(size=n_rows) + 2.0 * x.values[:, 0] + 10.0)
            family = constants.MODEL_FAMILIES[instance % len(constants.MODEL_FAMILIES)]
            spec = FamilySpec(family=family, lasso=_SMALL_LASSO)
            report = loocv(x, y, spec)
            assert report.predictions == _naive_loocv(x, y, spec)
            assert list(report.held_out.keys()) == list(x.rows)

    def test_thread_count_does_not_change_report(self):
        rng = np.random.default_rng(4)
        x = _design(_zscored_columns(rng, 15, 3))
        y = _target(rng.normal(size=15) + x.values[:, 1])
        spec = FamilySpec(family=constants.MODEL_FAMILY_LASSO, lasso=_SMALL_LASSO)
        assert loocv(x, y, spec, jobs=1) == loocv(x, y, spec, jobs=4)

    def test_report_is_self_consistent(self):
        rng = np.random.default_rng(5)
        x = _design(_zscored_columns(rng, 10, 2))
        y = _target(rng.normal(size=10) + x.values[:, 0])
        for family in constants.MODEL_FAMILIES:
            report = loocv(x, y, FamilySpec(family=family, lasso=_SMALL_LASSO))
            assert recompute_metrics(report) == report.metrics

    def test_fold_independence(self):
        rng = np.random.default_rng(6)
        x = _design(_zscored_columns(rng, 8, 2))
        y = _target(rng.normal(size=8) + x.values[:, 0])
        spec = FamilySpec(family=constants.MODEL_FAMILY_OLS_MULTI)
        full = loocv(x, y, spec)
        dropped = x.rows[3]
        reduced_y = RegionSeries("Gen", {k: v for k, v in y.values.items() if k != dropped})
        reduced = loocv(x.without_row(dropped), reduced_y, spec)
        assert dropped not in reduced.held_out
        assert set(reduced.held_out) == set(full.held_out) - {dropped}

    def test_too_few_regions(self):
        x = DesignMatrix(("A", "B"), (), np.zeros((2, 0)))
        with pytest.raises(FertcastException):
            loocv(
                x,
                RegionSeries("Gen", {"A": 1.0, "B": 2.0}),
                FamilySpec(family=constants.MODEL_FAMILY_CONSTANT),
            )

    def test_fold_errors_name_the_region(self):
        rng = np.random.default_rng(7)
        column = zscore_vector(rng.normal(size=6))
        x = _design(np.column_stack([column, column]), ["a", "b"])
        with pytest.raises(FoldFitException) as err:
            loocv(x, _target(rng.normal(size=6)), FamilySpec(family=constants.MODEL_FAMILY_OLS_MULTI))
        assert err.value.region == x.rows[0]

    def test_constant_baseline_smape_band(self):
        rng = np.random.default_rng(8)
        mean, std = constants.REFERENCE_VARIABLES["Gen"]
        values = []
        for _ in range(20):
            y = _target(rng.normal(loc=mean, scale=std, size=51))
            x = DesignMatrix(y.regions, (), np.zeros((51, 0)))
            report = loocv(x, y, FamilySpec(family=constants.MODEL_FAMILY_CONSTANT))
            values.append(report.metrics.smape_pct)
            halved_denominator = 100.0 * np.mean(
                [
                    abs(pair.prediction - pair.truth)
                    / ((abs(pair.prediction) + abs(pair.truth)) / 2.0)
                    for pair in report.held_out.values()
                ]
            )
            assert not 3.5 <= halved_denominator <= 6.5
        assert 3.5 <= float(np.mean(values)) <= 6.5


class TestChooseModel:
    def test_best_r(self):
        reports = [
            _report(constants.MODEL_FAMILY_LASSO, 0.90),
            _report(constants.MODEL_FAMILY_OLS_MULTI, 0.89),
            _report(constants.MODEL_FAMILY_OLS_SINGLE, 0.87),
        ]
        assert choose_model(reports) == constants.MODEL_FAMILY_LASSO

    def test_tie_prefers_lasso(self):
        reports = [
            _report(constants.MODEL_FAMILY_OLS_MULTI, 0.8),
            _report(constants.MODEL_FAMILY_LASSO, 0.8),
        ]
        assert choose_model(reports) == constants.MODEL_FAMILY_LASSO

    def test_tie_prefers_lower_rmse(self):
        reports = [
            _report(constants.MODEL_FAMILY_LASSO, 0.8, rmse_value=2.0),
            _report(constants.MODEL_FAMILY_OLS_SINGLE, 0.8, rmse_value=1.0),
        ]
        assert choose_model(reports) == constants.MODEL_FAMILY_OLS_SINGLE

    def test_single_best(self):
        reports = [
            _report(constants.MODEL_FAMILY_LASSO, 0.5),
            _report(constants.MODEL_FAMILY_OLS_SINGLE, 0.7),
        ]
        assert choose_model(reports) == constants.MODEL_FAMILY_OLS_SINGLE

    def test_constant_excluded(self):
        with pytest.raises(FertcastException):
            choose_model([_report(constants.MODEL_FAMILY_CONSTANT, 0.99)])
        reports = [
            _report(constants.MODEL_FAMILY_CONSTANT, 0.99),
            _report(constants.MODEL_FAMILY_OLS_MULTI, 0.1),
        ]
        assert choose_model(reports) == constants.MODEL_FAMILY_OLS_MULTI


class TestComputeMetrics:
    def test_flat_prediction_has_zero_r(self):
        metrics = compute_metrics([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        assert metrics.r == 0.0
        assert metrics.rmse == pytest.approx(math.sqrt(2.0 / 3.0))
