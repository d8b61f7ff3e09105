import dataclasses
import types
import typing

import numpy as np

from fertcast.exceptions import FertcastException


@dataclasses.dataclass(frozen=True)
class MonthlyTermVolume:
    term: str
    # (year, month) -> national volume
    samples: typing.Mapping[typing.Tuple[int, int], float]

    def __post_init__(self):
        samples = {}
        for (year, month), volume in self.samples.items():
            if not 1 <= int(month) <= 12:
                raise FertcastException(
                    f"Term '{self.term}' has an invalid month {year}-{month}"
                )
            if volume < 0:
                raise FertcastException(
                    f"Term '{self.term}' has a negative volume in {year}-{month:02d}"
                )
            samples[(int(year), int(month))] = float(volume)
        object.__setattr__(self, "samples", types.MappingProxyType(samples))

    @property
    def years(self) -> typing.List[int]:
        return sorted({year for year, _ in self.samples.keys()})


@dataclasses.dataclass(frozen=True)
class AnnualTermMatrix:
    years: typing.Tuple[int, ...]
    terms: typing.Tuple[str, ...]
    # years x terms, each column z-normalized across years
    z_values: np.ndarray = dataclasses.field(repr=False, compare=False)

    def column(self, term: str) -> np.ndarray:
        try:
            return self.z_values[:, self.terms.index(term)]
        except ValueError as err:
            raise FertcastException(f"Annual matrix has no term '{term}'") from err


@dataclasses.dataclass(frozen=True)
class TrendReport:
    variable: str
    years: typing.Tuple[int, ...]
    predicted: typing.Tuple[float, ...]
    truth: typing.Tuple[float, ...]
    r: float
    predicted_rescaled: typing.Tuple[float, ...]
    truth_rescaled: typing.Tuple[float, ...]
    # Series emitted without rescaling because their maximum is not positive
    unscaled: typing.Tuple[str, ...] = ()
