import concurrent.futures
import dataclasses
import logging
import os
import typing

from fertcast import constants
from fertcast.correlation_search import build_corpus, select_terms, top_k_correlated
from fertcast.evaluation import choose_model, loocv
from fertcast.exceptions import (
    DegenerateSeriesException,
    FertcastException,
    StageException,
)
from fertcast.file_manager import FileManager
from fertcast.models.config_models import PipelineConfig
from fertcast.models.correlate_models import SelectionConfig, TermCorpus
from fertcast.models.pipeline_models import PipelineResult, VariableOutcome
from fertcast.models.regression_models import DesignMatrix, FamilySpec
from fertcast.models.series_models import FertilityVariable
from fertcast.models.transfer_models import MonthlyTermVolume
from fertcast.regression import fit_family
from fertcast.series import fertility_intensity
from fertcast.transfer import build_annual_matrix, build_trend_report, national_truth

STAGE_CORRELATE = "correlate"
STAGE_SELECT = "select"
STAGE_EVALUATE = "evaluate"
STAGE_FIT = "fit"
STAGE_TRANSFER = "transfer"


@dataclasses.dataclass(frozen=True)
class _PipelineInputs:
    variables: typing.List[FertilityVariable]
    panel: typing.Dict[str, typing.Dict[int, FertilityVariable]]
    corpus: TermCorpus
    volumes: typing.Dict[str, MonthlyTermVolume]
    selection: SelectionConfig


class PipelineRunner:
    """Runs every stage for every fertility variable.

    Each variable writes into its own subdirectory of the output directory;
    the cross-variable summaries are written once all of them finish, in
    ground truth order, so the artifacts do not depend on the thread count.
    """

    def __init__(self, file_manager: FileManager):
        self._file_manager = file_manager
        self._logger = logging.getLogger(self.__class__.__name__)

    def run(self, config: PipelineConfig) -> PipelineResult:
        inputs = self.__load_inputs(config)
        self._file_manager.create_file_tree(config.output_dir)

        variable_jobs = config.jobs if len(inputs.variables) > 1 else 1
        fold_jobs = config.jobs if variable_jobs == 1 else 1

        def process(variable: FertilityVariable) -> VariableOutcome:
            return self.__process_variable(config, inputs, variable, fold_jobs)

        if variable_jobs > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=variable_jobs) as executor:
                outcomes = tuple(executor.map(process, inputs.variables))
        else:
            outcomes = tuple(process(variable) for variable in inputs.variables)

        self._file_manager.write_evaluation(
            os.path.join(config.output_dir, constants.FILE_NAME_EVALUATION),
            [report for outcome in outcomes for report in outcome.reports],
            config.scale,
        )
        self._file_manager.write_trends_summary(
            os.path.join(config.output_dir, constants.FILE_NAME_TRENDS_SUMMARY),
            [outcome.trend for outcome in outcomes if outcome.trend is not None],
        )

        result = PipelineResult(output_dir=config.output_dir, outcomes=outcomes)
        if result.dropped_variables:
            self._logger.warning(
                "Variables dropped for lack of relevant terms: %s",
                ", ".join(result.dropped_variables),
            )
        self._logger.info("Pipeline finished. Artifacts in %s", config.output_dir)
        return result

    def __load_inputs(self, config: PipelineConfig) -> _PipelineInputs:
        variables = self._file_manager.read_ground_truth(
            config.ground_truth, year=config.reference_year
        )
        if config.variables:
            unknown = set(config.variables) - {variable.name for variable in variables}
            if unknown:
                raise FertcastException(
                    f"Variables {sorted(unknown)} are not in {config.ground_truth}"
                )
            variables = [
                variable for variable in variables if variable.name in config.variables
            ]
        if not variables:
            raise FertcastException(f"No fertility variables in {config.ground_truth}")

        regions = set(variables[0].births.keys())
        rows = self._file_manager.read_correlate_export(
            config.corpus, regions=regions, ddof=config.ddof
        )
        corpus = build_corpus([(row.term, row.z_series) for row in rows])

        panel = self._file_manager.read_ground_truth_panel(
            config.ground_truth, required=False
        )
        if not panel:
            self._logger.warning(
                "%s has no yearly panel. Trends will not be computed", config.ground_truth
            )
        volumes = {
            volume.term: volume
            for volume in self._file_manager.read_trends_monthly(config.trends)
        }

        selection = config.selection
        if config.lexicon:
            selection = dataclasses.replace(
                selection, lexicon=self._file_manager.read_lexicon(config.lexicon)
            )
        return _PipelineInputs(
            variables=variables,
            panel=panel,
            corpus=corpus,
            volumes=volumes,
            selection=selection,
        )

    @staticmethod
    def __stage(stage: str, variable: str, action: typing.Callable):
        try:
            return action()
        except StageException:
            raise
        except FertcastException as err:
            raise StageException(stage, variable, err.message) from err

    def __process_variable(
        self,
        config: PipelineConfig,
        inputs: _PipelineInputs,
        variable: FertilityVariable,
        fold_jobs: int,
    ) -> VariableOutcome:
        name = variable.name
        variable_dir = os.path.join(config.output_dir, name)
        self._file_manager.create_file_tree(variable_dir)
        self._logger.info("Processing variable '%s'", name)

        target = self.__stage(
            STAGE_CORRELATE, name, lambda: fertility_intensity(variable, config.scale)
        )
        ranked = self.__stage(
            STAGE_CORRELATE,
            name,
            lambda: top_k_correlated(inputs.corpus, target, config.top_k),
        )
        self._file_manager.write_correlate_export(
            os.path.join(variable_dir, constants.FILE_NAME_RANKED_TERMS),
            ranked,
            inputs.corpus.region_order,
        )

        selected = self.__stage(
            STAGE_SELECT, name, lambda: select_terms(ranked, inputs.selection)
        )
        self._file_manager.write_correlate_export(
            os.path.join(variable_dir, constants.FILE_NAME_SELECTED_TERMS),
            selected,
            inputs.corpus.region_order,
        )
        if not selected:
            self._logger.warning(
                "Variable '%s' dropped: no relevant term among the top %d", name, config.top_k
            )
            return VariableOutcome(variable=name, ranked=tuple(ranked))

        design = self.__stage(
            STAGE_EVALUATE,
            name,
            lambda: DesignMatrix.from_series(
                [(term.term, term.z_series) for term in selected],
                rows=inputs.corpus.region_order,
            ),
        )
        specs = {
            family: FamilySpec(
                family=family,
                lasso=config.lasso,
                single_term_mode=config.single_term_mode,
            )
            for family in constants.MODEL_FAMILIES
        }
        reports = tuple(
            self.__stage(
                STAGE_EVALUATE,
                name,
                lambda spec=spec: loocv(design, target, spec, jobs=fold_jobs),
            )
            for spec in specs.values()
        )
        self._file_manager.write_evaluation(
            os.path.join(variable_dir, constants.FILE_NAME_EVALUATION),
            reports,
            config.scale,
        )

        chosen_family = self.__stage(STAGE_EVALUATE, name, lambda: choose_model(reports))
        model = self.__stage(
            STAGE_FIT, name, lambda: fit_family(specs[chosen_family], design, target)
        )
        lasso_model = (
            model
            if chosen_family == constants.MODEL_FAMILY_LASSO
            else self.__stage(
                STAGE_FIT,
                name,
                lambda: fit_family(specs[constants.MODEL_FAMILY_LASSO], design, target),
            )
        )
        self._logger.info(
            "Variable '%s': chose %s with terms %s",
            name,
            chosen_family,
            sorted(model.active_terms),
        )
        self._file_manager.write_model(
            os.path.join(variable_dir, constants.FILE_NAME_MODEL), model
        )
        self._file_manager.write_sparsification(
            os.path.join(variable_dir, constants.FILE_NAME_SPARSIFICATION), lasso_model
        )

        trend = self.__stage(
            STAGE_TRANSFER,
            name,
            lambda: self.__transfer(config, inputs, name, model, variable_dir),
        )
        return VariableOutcome(
            variable=name,
            ranked=tuple(ranked),
            selected=tuple(selected),
            reports=reports,
            chosen_family=chosen_family,
            model=model,
            removed_terms=tuple(lasso_model.removed_terms),
            trend=trend,
        )

    def __transfer(self, config: PipelineConfig, inputs: _PipelineInputs, name, model, variable_dir):
        variable_panel = inputs.panel.get(name)
        if not variable_panel:
            return None
        years = list(config.years) if config.years else sorted(variable_panel.keys())
        missing_years = [year for year in years if year not in variable_panel]
        if missing_years:
            raise FertcastException(
                f"Ground truth has no '{name}' data for years {missing_years}"
            )
        terms = sorted(model.active_terms)
        missing_terms = [term for term in terms if term not in inputs.volumes]
        if missing_terms:
            raise FertcastException(f"No monthly trends for model terms {missing_terms}")

        matrix = build_annual_matrix([inputs.volumes[term] for term in terms], years)
        truth = national_truth(
            {year: variable_panel[year] for year in years}, config.scale
        )
        try:
            report = build_trend_report(model, matrix, truth, variable=name)
        except DegenerateSeriesException as err:
            self._logger.warning(
                "Variable '%s' has no temporal trend to compare: %s", name, err.message
            )
            return None

        self._file_manager.write_trends_summary(
            os.path.join(variable_dir, constants.FILE_NAME_TREND), [report]
        )
        self._file_manager.write_plot_data(
            os.path.join(variable_dir, constants.FILE_NAME_PLOT_DATA), report
        )
        self._logger.info("Variable '%s': temporal r %.3f", name, report.r)
        return report
