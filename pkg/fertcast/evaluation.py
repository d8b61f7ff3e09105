import concurrent.futures
import logging
import typing

import numpy as np

from fertcast import constants
from fertcast.exceptions import FertcastException, FoldFitException
from fertcast.models.evaluation_models import (
    EvaluationReport,
    HeldOutPrediction,
    Metrics,
)
from fertcast.models.regression_models import DesignMatrix, FamilySpec
from fertcast.models.series_models import RegionSeries
from fertcast.regression import fit_family, predict
from fertcast.series import prediction_correlation

__logger = logging.getLogger(__name__)


def __paired_vectors(predicted, truth) -> typing.Tuple[np.ndarray, np.ndarray]:
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise FertcastException(
            f"Predictions {predicted.shape} and truth {truth.shape} are not paired"
        )
    if predicted.size == 0:
        raise FertcastException("Cannot compute metrics on empty vectors")
    return predicted, truth


def rmse(predicted, truth) -> float:
    predicted, truth = __paired_vectors(predicted, truth)
    return float(np.sqrt(np.mean((predicted - truth) ** 2)))


def smape(predicted, truth) -> float:
    """Symmetric absolute percentage error in [0, 100], without the usual /2."""
    predicted, truth = __paired_vectors(predicted, truth)
    denominators = np.abs(predicted) + np.abs(truth)
    numerators = np.abs(predicted - truth)
    # A (0, 0) pair is a perfect prediction of zero
    ratios = np.divide(
        numerators,
        denominators,
        out=np.zeros_like(numerators),
        where=denominators > 0,
    )
    return float(100.0 * np.mean(ratios))


def compute_metrics(predicted, truth) -> Metrics:
    return Metrics(
        r=prediction_correlation(predicted, truth),
        rmse=rmse(predicted, truth),
        smape_pct=smape(predicted, truth),
    )


def recompute_metrics(report: EvaluationReport) -> Metrics:
    return compute_metrics(report.predictions, report.truths)


def predictive_r(report: EvaluationReport) -> float:
    return prediction_correlation(report.predictions, report.truths)


def __without_region(y: RegionSeries, region: str) -> RegionSeries:
    return RegionSeries(
        y.variable_name, {key: value for key, value in y.values.items() if key != region}
    )


def loocv(
    x: DesignMatrix, y: RegionSeries, spec: FamilySpec, jobs: int = 1
) -> EvaluationReport:
    """Leave-one-out cross-validation of one model family.

    Every fold refits the whole family (penalty selection and single term choice
    included) on the remaining regions. Folds may run on ``jobs`` threads; the
    report is always assembled in design row order.
    """
    y.validate_regions()
    x.target_vector(y)

    def run_fold(region: str):
        try:
            model = fit_family(spec, x.without_row(region), __without_region(y, region))
        except FertcastException as err:
            raise FoldFitException(region, err.message) from err
        prediction = predict(model, x.only_row(region)).values[region]
        return prediction, tuple(sorted(model.active_terms))

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(run_fold, x.rows))
    else:
        results = [run_fold(region) for region in x.rows]

    held_out = {
        region: HeldOutPrediction(truth=y.values[region], prediction=float(prediction))
        for region, (prediction, _) in zip(x.rows, results)
    }
    fold_terms = {region: terms for region, (_, terms) in zip(x.rows, results)}
    predictions = [pair.prediction for pair in held_out.values()]
    truths = [pair.truth for pair in held_out.values()]
    report = EvaluationReport(
        variable=y.variable_name,
        family=spec.family,
        held_out=held_out,
        metrics=compute_metrics(predictions, truths),
        fold_terms=fold_terms,
    )
    __logger.info(
        "LOOCV '%s' %s: r=%.3f rmse=%.4f smape=%.2f%%",
        report.variable,
        report.family,
        report.metrics.r,
        report.metrics.rmse,
        report.metrics.smape_pct,
    )
    return report


def choose_model(reports: typing.Sequence[EvaluationReport]) -> str:
    """Family with the best predictive r, ties by RMSE then lasso > multi > single."""
    candidates = [
        report
        for report in reports
        if report.family in constants.CANDIDATE_FAMILY_PREFERENCE
    ]
    if not candidates:
        raise FertcastException("No candidate model family to choose from")
    best = min(
        candidates,
        key=lambda report: (
            -report.metrics.r,
            report.metrics.rmse,
            constants.CANDIDATE_FAMILY_PREFERENCE.index(report.family),
        ),
    )
    return best.family
