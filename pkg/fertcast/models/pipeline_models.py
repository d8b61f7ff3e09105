import dataclasses
import typing

from fertcast.models.correlate_models import RankedTerm
from fertcast.models.evaluation_models import EvaluationReport
from fertcast.models.regression_models import FittedModel
from fertcast.models.transfer_models import TrendReport


@dataclasses.dataclass(frozen=True)
class VariableOutcome:
    variable: str
    ranked: typing.Tuple[RankedTerm, ...] = ()
    selected: typing.Tuple[RankedTerm, ...] = ()
    reports: typing.Tuple[EvaluationReport, ...] = ()
    chosen_family: typing.Optional[str] = None
    model: typing.Optional[FittedModel] = None
    removed_terms: typing.Tuple[str, ...] = ()
    trend: typing.Optional[TrendReport] = None

    @property
    def dropped(self) -> bool:
        return not self.selected


@dataclasses.dataclass(frozen=True)
class PipelineResult:
    output_dir: str
    outcomes: typing.Tuple[VariableOutcome, ...]

    @property
    def dropped_variables(self) -> typing.List[str]:
        return [outcome.variable for outcome in self.outcomes if outcome.dropped]
