"""Train across space, apply across time.

National yearly search volumes are z-normalized per term so that each year
plays the role a region plays in the spatial model.
"""

import logging
import typing

import numpy as np

from fertcast import constants
from fertcast.exceptions import (
    DegenerateSeriesException,
    FertcastException,
    IncompleteYearException,
    RescaleException,
)
from fertcast.models.regression_models import FittedModel
from fertcast.models.series_models import FertilityVariable
from fertcast.models.transfer_models import (
    AnnualTermMatrix,
    MonthlyTermVolume,
    TrendReport,
)
from fertcast.series import pearson_r, zscore_vector

__logger = logging.getLogger(__name__)

__MONTHS = tuple(range(1, 13))


def annualize(
    volume: MonthlyTermVolume, years: typing.Sequence[int] = None
) -> typing.Dict[int, float]:
    years = volume.years if years is None else list(years)
    totals = {}
    for year in years:
        missing = [month for month in __MONTHS if (year, month) not in volume.samples]
        if missing:
            raise IncompleteYearException(volume.term, year, missing)
        totals[year] = float(sum(volume.samples[(year, month)] for month in __MONTHS))
    return totals


def build_annual_matrix(
    volumes: typing.Sequence[MonthlyTermVolume], years: typing.Sequence[int]
) -> AnnualTermMatrix:
    years = tuple(int(year) for year in years)
    if len(years) < 2:
        raise FertcastException(f"At least two years are required, got {list(years)}")
    if len(set(years)) != len(years):
        raise FertcastException(f"Duplicated years {list(years)}")
    terms = [volume.term for volume in volumes]
    if len(set(terms)) != len(terms):
        raise FertcastException(f"Duplicated terms in monthly volumes {terms}")

    columns = []
    for volume in volumes:
        totals = annualize(volume, years)
        try:
            columns.append(
                zscore_vector([totals[year] for year in years], name=volume.term)
            )
        except DegenerateSeriesException as err:
            raise DegenerateSeriesException(
                volume.term, f"Term '{volume.term}' is constant across years"
            ) from err

    z_values = np.column_stack(columns) if columns else np.zeros((len(years), 0))
    z_values.setflags(write=False)
    return AnnualTermMatrix(years=years, terms=tuple(terms), z_values=z_values)


def apply_spatial_model(model: FittedModel, matrix: AnnualTermMatrix) -> np.ndarray:
    """Yearly predictions; only their shape across years is meaningful."""
    terms = [term for term, coef in model.coefficients.items() if coef != 0.0]
    missing = [term for term in terms if term not in matrix.terms]
    if missing:
        raise FertcastException(f"Annual matrix lacks model terms {missing}")
    predictions = np.full(len(matrix.years), model.intercept)
    for term in terms:
        predictions = predictions + model.coefficients[term] * matrix.column(term)
    return predictions


def trend_correlation(predicted, truth) -> float:
    return pearson_r(predicted, truth)


def rescale_max1(series) -> np.ndarray:
    vector = np.asarray(series, dtype=float)
    if vector.size == 0:
        raise RescaleException("Cannot rescale an empty series")
    maximum = float(vector.max())
    if maximum <= 0.0:
        raise RescaleException(f"Cannot rescale a series with maximum {maximum}")
    return vector / maximum


def national_truth(
    panel: typing.Mapping[int, FertilityVariable],
    scale: float = constants.DEFAULT_INTENSITY_SCALE,
) -> typing.Dict[int, float]:
    """Yearly national intensity: total births over total women 15-50."""
    truth = {}
    for year, variable in sorted(panel.items()):
        women = sum(variable.women_15_50[region] for region in variable.births.keys())
        if women <= 0:
            raise FertcastException(
                f"Variable '{variable.name}' has no women 15-50 in {year}"
            )
        truth[year] = scale * sum(variable.births.values()) / women
    return truth


def build_trend_report(
    model: FittedModel,
    matrix: AnnualTermMatrix,
    truth: typing.Mapping[int, float],
    variable: str = None,
) -> TrendReport:
    missing_years = [year for year in matrix.years if year not in truth]
    if missing_years:
        raise FertcastException(f"Ground truth lacks years {missing_years}")

    predictions = dict(zip(matrix.years, apply_spatial_model(model, matrix)))
    years = tuple(sorted(matrix.years))
    predicted = np.array([predictions[year] for year in years])
    truth_vector = np.array([truth[year] for year in years])
    r_value = trend_correlation(predicted, truth_vector)

    unscaled = []
    rescaled = {}
    for name, vector in (("predicted", predicted), ("truth", truth_vector)):
        try:
            rescaled[name] = rescale_max1(vector)
        except RescaleException:
            __logger.warning(
                "Series '%s' of '%s' has no positive maximum. Emitted unscaled",
                name,
                variable or model.variable,
            )
            rescaled[name] = vector
            unscaled.append(name)

    return TrendReport(
        variable=variable or model.variable,
        years=years,
        predicted=tuple(float(value) for value in predicted),
        truth=tuple(float(value) for value in truth_vector),
        r=r_value,
        predicted_rescaled=tuple(float(value) for value in rescaled["predicted"]),
        truth_rescaled=tuple(float(value) for value in rescaled["truth"]),
        unscaled=tuple(unscaled),
    )
