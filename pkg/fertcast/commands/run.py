import logging

import marshmallow.exceptions
from dependency_injector.wiring import inject, Provide

import fertcast.loggers
from fertcast import constants
from fertcast.commands import command_commons
from fertcast.di import Container
from fertcast.exceptions import FertcastException, FertcastValidationException
from fertcast.models.config_models import PipelineConfig, PipelineConfigSchema
from fertcast.pipeline import PipelineRunner

__logger = logging.getLogger(__name__)


def __pipeline_config_from_args(args, output_dir: str) -> PipelineConfig:
    data = {
        "ground-truth": args.ground_truth,
        "corpus": args.corpus,
        "trends": args.trends,
        "output-dir": output_dir,
        "lexicon": args.lexicon,
        "reference-year": args.reference_year,
        "years": args.years or [],
        "variables": args.variables or [],
        "top-k": args.top_k,
        "scale": args.scale,
        "ddof": args.ddof,
        "selection": {
            "max-terms": args.max_terms,
            "dedup-plural": not args.keep_plurals,
            "min-r": args.min_r,
        },
        "lasso": {
            "lambda-points": args.lambda_points,
            "lambda-ratio": args.lambda_ratio,
            "max-sweeps": args.max_sweeps,
            "tolerance": args.tolerance,
        },
        "single-term-mode": args.single_term_mode,
        "jobs": args.jobs,
    }
    try:
        return PipelineConfigSchema().load(data)
    except marshmallow.exceptions.ValidationError as err:
        raise FertcastValidationException(
            "Validation issues in pipeline configuration", err.messages_dict
        ) from err


@inject
def __run(
    args,
    pipeline_runner: PipelineRunner = Provide[Container.pipeline_runner],
    output_dir: str = Provide[Container.config.output_dir],
):
    try:
        fertcast.loggers.configure("INFO" if not args.quiet else "ERROR")

        config = __pipeline_config_from_args(args, output_dir)
        try:
            pipeline_runner.run(config)
        except FileNotFoundError as err:
            raise FertcastException(
                f"Input file '{err.filename}' not found", exit_code=2
            ) from err

    except FertcastException as err:
        command_commons.manage_fertcast_exceptions(err)


def register(subparsers):
    command_parser = subparsers.add_parser(
        "run", help="Run every stage for every fertility variable"
    )
    command_parser.set_defaults(func=__run, quiet=False)

    command_parser.add_argument(
        "-c",
        "--config",
        is_config_file=True,
        help="Path to a key = value pipeline configuration file",
    )
    command_commons.register_ddof_arg_option(command_parser)
    command_commons.register_lasso_arg_options(command_parser)
    command_commons.register_quiet_arg_option(command_parser)
    command_parser.add_argument(
        "--ground-truth",
        dest="ground_truth",
        required=True,
        help="Path to the ground truth CSV file",
    )
    command_parser.add_argument(
        "--corpus",
        dest="corpus",
        required=True,
        help="Path to the correlate export with the per-region term series",
    )
    command_parser.add_argument(
        "--trends",
        dest="trends",
        required=True,
        help="Path to the monthly national trends CSV",
    )
    command_parser.add_argument(
        "--lexicon",
        dest="lexicon",
        required=False,
        help="Path to the YAML lexicon with allow and block stems",
    )
    command_parser.add_argument(
        "--reference-year",
        dest="reference_year",
        type=int,
        default=constants.DEFAULT_REFERENCE_YEAR,
        help="Year of the ground truth the spatial models are trained on",
    )
    command_parser.add_argument(
        "--years",
        dest="years",
        type=int,
        nargs="+",
        help="Years of the temporal comparison, every panel year by default",
    )
    command_parser.add_argument(
        "--variables",
        dest="variables",
        nargs="+",
        help="Fertility variables to process, all of them by default",
    )
    command_parser.add_argument(
        "--top-k",
        dest="top_k",
        type=int,
        default=constants.DEFAULT_TOP_K,
        help="Number of ranked terms kept per variable",
    )
    command_parser.add_argument(
        "--scale",
        dest="scale",
        type=float,
        default=constants.DEFAULT_INTENSITY_SCALE,
        help="Multiplier applied to births per woman aged 15-50",
    )
    command_parser.add_argument(
        "--max-terms",
        dest="max_terms",
        type=int,
        default=constants.DEFAULT_MAX_TERMS,
        help="Maximum number of selected terms per variable",
    )
    command_parser.add_argument(
        "--min-r",
        dest="min_r",
        type=float,
        default=0.0,
        help="Minimum correlation of a selected term, 0 disables it",
    )
    command_parser.add_argument(
        "--keep-plurals",
        dest="keep_plurals",
        action="store_true",
        help="Keep singular and plural forms of the same term",
    )
    command_parser.add_argument(
        "-j",
        "--jobs",
        dest="jobs",
        type=int,
        default=1,
        help="Worker threads",
    )
    command_parser.add_argument(
        "-d",
        "--output-dir",
        dest="output_dir",
        required=True,
        env_var=constants.ENV_VAR_OUTPUT_DIR,
        help="Directory for every pipeline artifact",
    )
