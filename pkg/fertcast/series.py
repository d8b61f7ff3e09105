import logging
import typing

import numpy as np

from fertcast import constants
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

__logger = logging.getLogger(__name__)

SeriesOrVector = typing.Union[RegionSeries, typing.Sequence[float], np.ndarray]


def fertility_intensity(
    variable: FertilityVariable, scale: float = constants.DEFAULT_INTENSITY_SCALE
) -> RegionSeries:
    """Births of a category per woman aged 15-50, multiplied by ``scale``."""
    missing = set(variable.births.keys()) - set(variable.women_15_50.keys())
    if missing:
        raise RegionMismatchException(
            f"Variable '{variable.name}' has no women 15-50 count for regions",
            missing,
        )

    intensities = {}
    for region, births in variable.births.items():
        women = variable.women_15_50[region]
        if women <= 0:
            raise FertcastException(
                f"Variable '{variable.name}' has a non positive women 15-50 count in {region}"
            )
        intensities[region] = scale * births / women
    return RegionSeries(variable.name, intensities)


def _check_not_degenerate(vector: np.ndarray, name: str, ddof: int):
    if vector.size < 2 or vector.size <= ddof:
        raise DegenerateSeriesException(
            name, f"Series '{name}' needs at least 2 values, got {vector.size}"
        )
    std = vector.std(ddof=ddof)
    if std < constants.DEGENERATE_STD_RATIO * max(1.0, abs(vector.mean())):
        raise DegenerateSeriesException(name)
    return std


def zscore_vector(
    values, name: str = "<vector>", ddof: int = constants.DEFAULT_STD_DDOF
) -> np.ndarray:
    vector = np.asarray(values, dtype=float)
    std = _check_not_degenerate(vector, name, ddof)
    return (vector - vector.mean()) / std


def zscore(
    series: SeriesOrVector, ddof: int = constants.DEFAULT_STD_DDOF
) -> typing.Union[ZScoredSeries, np.ndarray]:
    if isinstance(series, RegionSeries):
        order = series.regions
        return ZScoredSeries.from_vector(
            series.variable_name,
            order,
            zscore_vector(series.vector(order), name=series.variable_name, ddof=ddof),
        )
    return zscore_vector(series, ddof=ddof)


def pearson_r(a, b) -> float:
    """Product-moment correlation computed as the mean product of z-scores."""
    a_vector = np.asarray(a, dtype=float)
    b_vector = np.asarray(b, dtype=float)
    if a_vector.shape != b_vector.shape or a_vector.ndim != 1:
        raise FertcastException(
            f"Cannot correlate vectors of shapes {a_vector.shape} and {b_vector.shape}"
        )
    a_z = zscore_vector(a_vector, name="a", ddof=0)
    b_z = zscore_vector(b_vector, name="b", ddof=0)
    return float(np.clip(np.dot(a_z, b_z) / a_vector.size, -1.0, 1.0))


def prediction_correlation(predicted, truth) -> float:
    """Pearson r between predictions and truth, 0 for flat predictions."""
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.size < 2:
        return 0.0
    if predicted.std() < constants.PREDICTION_STD_RATIO * max(
        1.0, abs(predicted.mean())
    ):
        return 0.0
    try:
        return pearson_r(predicted, truth)
    except DegenerateSeriesException:
        return 0.0
