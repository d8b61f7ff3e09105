import dataclasses
import typing


@dataclasses.dataclass(frozen=True)
class Metrics:
    r: float
    rmse: float
    smape_pct: float


@dataclasses.dataclass(frozen=True)
class HeldOutPrediction:
    truth: float
    prediction: float


@dataclasses.dataclass(frozen=True)
class EvaluationReport:
    variable: str
    family: str
    # Canonical (design row) order
    held_out: typing.Mapping[str, HeldOutPrediction]
    metrics: Metrics
    # Fold models keyed by held-out region, kept for diagnostics only
    fold_terms: typing.Mapping[str, typing.Tuple[str, ...]] = dataclasses.field(
        default_factory=dict, compare=False, repr=False
    )

    @property
    def truths(self) -> typing.List[float]:
        return [pair.truth for pair in self.held_out.values()]

    @property
    def predictions(self) -> typing.List[float]:
        return [pair.prediction for pair in self.held_out.values()]
