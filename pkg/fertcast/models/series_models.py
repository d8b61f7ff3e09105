import dataclasses
import math
import types
import typing

import numpy as np

from fertcast import constants
from fertcast.exceptions import FertcastException, RegionMismatchException


def _freeze(values: typing.Mapping[str, float]) -> typing.Mapping[str, float]:
    return types.MappingProxyType({str(key): float(val) for key, val in values.items()})


@dataclasses.dataclass(frozen=True)
class RegionSeries:
    """One real value per region, keyed by an opaque region code."""

    variable_name: str
    values: typing.Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        non_finite = [
            region for region, value in self.values.items() if not math.isfinite(value)
        ]
        if non_finite:
            raise FertcastException(
                f"Series '{self.variable_name}' has non finite values for {sorted(non_finite)}"
            )

    def __len__(self):
        return len(self.values)

    @property
    def regions(self) -> typing.Tuple[str, ...]:
        return tuple(sorted(self.values.keys()))

    def vector(self, order: typing.Sequence[str] = None) -> np.ndarray:
        order = self.regions if order is None else order
        missing = set(order) - set(self.values.keys())
        extra = set(self.values.keys()) - set(order)
        if missing or extra:
            raise RegionMismatchException(
                f"Series '{self.variable_name}' does not cover the requested regions",
                missing | extra,
            )
        return np.array([self.values[region] for region in order], dtype=float)

    def validate_regions(self, min_regions: int = constants.MIN_REGIONS):
        if len(self.values) < min_regions:
            raise FertcastException(
                f"Series '{self.variable_name}' has {len(self.values)} regions, "
                f"at least {min_regions} are required"
            )

    @classmethod
    def from_vector(
        cls, variable_name: str, order: typing.Sequence[str], vector
    ) -> "RegionSeries":
        if len(order) != len(vector):
            raise FertcastException(
                f"Series '{variable_name}' has {len(vector)} values for {len(order)} regions"
            )
        return cls(variable_name, dict(zip(order, (float(val) for val in vector))))


@dataclasses.dataclass(frozen=True)
class ZScoredSeries(RegionSeries):
    """A region series shifted to mean 0 and scaled to standard deviation 1."""

    def check_normalized(
        self, tolerance: float = constants.ABS_TOLERANCE, ddof: int = 0
    ) -> bool:
        vector = self.vector()
        if len(vector) <= ddof:
            return False
        return bool(
            abs(vector.mean()) <= tolerance
            and abs(vector.std(ddof=ddof) - 1.0) <= tolerance
        )


@dataclasses.dataclass(frozen=True)
class FertilityVariable:
    name: str
    births: typing.Mapping[str, float]
    women_15_50: typing.Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "births", _freeze(self.births))
        object.__setattr__(self, "women_15_50", _freeze(self.women_15_50))
        negative = [region for region, count in self.births.items() if count < 0]
        if negative:
            raise FertcastException(
                f"Variable '{self.name}' has negative births for {sorted(negative)}"
            )
