import json
import logging
import sys
import typing

import marshmallow.exceptions

from fertcast import constants
from fertcast.correlation_search import build_corpus
from fertcast.exceptions import FertcastException, FertcastValidationException
from fertcast.file_manager import FileManager
from fertcast.models.correlate_models import RankedTerm
from fertcast.models.regression_models import DesignMatrix, LassoConfigSchema
from fertcast.models.series_models import RegionSeries
from fertcast.series import fertility_intensity

__logger = logging.getLogger(__name__)


def load_target_from_args(args, file_manager: FileManager) -> RegionSeries:
    try:
        variables = file_manager.read_ground_truth(
            args.ground_truth, year=args.reference_year
        )
    except FileNotFoundError as err:
        raise FertcastException(
            f"Ground truth file '{args.ground_truth}' not found", exit_code=2
        ) from err
    variable = next((item for item in variables if item.name == args.target), None)
    if variable is None:
        raise FertcastException(
            f"Variable '{args.target}' not found in '{args.ground_truth}'. "
            f"Available: {[item.name for item in variables]}"
        )
    return fertility_intensity(variable, args.scale)


def load_ranked_terms(path, file_manager: FileManager, ddof: int) -> typing.List[RankedTerm]:
    """Ranked or selected term lists, both stored in the correlate export format."""
    try:
        rows = file_manager.read_correlate_export(path, ddof=ddof)
    except FileNotFoundError as err:
        raise FertcastException(f"Term list '{path}' not found", exit_code=2) from err
    missing_r = [row.term for row in rows if row.r is None]
    if missing_r:
        raise FertcastException(f"Terms without a stored correlation in '{path}': {missing_r}")
    # Re-normalizes exports written with another standard deviation divisor
    corpus = build_corpus([(row.term, row.z_series) for row in rows]) if rows else None
    return [
        RankedTerm(term=row.term, r=row.r, z_series=entry.z)
        for row, entry in zip(rows, corpus.entries if corpus else ())
    ]


def build_design_from_args(args, file_manager: FileManager) -> DesignMatrix:
    selected = load_ranked_terms(args.selected, file_manager, args.ddof)
    if not selected:
        raise FertcastException(f"No selected terms in '{args.selected}'")
    return DesignMatrix.from_series([(term.term, term.z_series) for term in selected])


def lasso_config_from_args(args):
    try:
        return LassoConfigSchema().load(
            {
                "lambda-points": args.lambda_points,
                "lambda-ratio": args.lambda_ratio,
                "max-sweeps": args.max_sweeps,
                "tolerance": args.tolerance,
            }
        )
    except marshmallow.exceptions.ValidationError as err:
        raise FertcastValidationException(
            "Validation issues in lasso options", err.messages_dict
        ) from err


def register_quiet_arg_option(command_parser):
    command_parser.add_argument(
        "--quiet",
        dest="quiet",
        action="store_true",
        help="Disable all no error logs",
    )


def register_target_arg_options(command_parser):
    command_parser.add_argument(
        "--target",
        dest="target",
        required=True,
        help="Name of the fertility variable to model",
    )
    command_parser.add_argument(
        "--ground-truth",
        dest="ground_truth",
        required=True,
        help="Path to the ground truth CSV file",
    )
    command_parser.add_argument(
        "--reference-year",
        dest="reference_year",
        type=int,
        default=constants.DEFAULT_REFERENCE_YEAR,
        help="Year of the ground truth used as target when the file holds several",
    )
    command_parser.add_argument(
        "--scale",
        dest="scale",
        type=float,
        default=constants.DEFAULT_INTENSITY_SCALE,
        help="Multiplier applied to births per woman aged 15-50",
    )


def register_ddof_arg_option(command_parser):
    command_parser.add_argument(
        "--ddof",
        dest="ddof",
        type=int,
        choices=[0, 1],
        default=constants.DEFAULT_STD_DDOF,
        help="Standard deviation divisor offset used by imported z-scores",
    )


def register_lasso_arg_options(command_parser):
    command_parser.add_argument(
        "--lambda-points",
        dest="lambda_points",
        type=int,
        default=constants.DEFAULT_LAMBDA_POINTS,
        help="Number of penalties in the lasso grid",
    )
    command_parser.add_argument(
        "--lambda-ratio",
        dest="lambda_ratio",
        type=float,
        default=constants.DEFAULT_LAMBDA_RATIO,
        help="Smallest over largest penalty of the lasso grid",
    )
    command_parser.add_argument(
        "--max-sweeps",
        dest="max_sweeps",
        type=int,
        default=constants.DEFAULT_LASSO_MAX_SWEEPS,
        help="Coordinate descent sweep limit",
    )
    command_parser.add_argument(
        "--tolerance",
        dest="tolerance",
        type=float,
        default=constants.DEFAULT_LASSO_TOLERANCE,
        help="Coordinate descent convergence tolerance",
    )
    command_parser.add_argument(
        "--single-term-mode",
        dest="single_term_mode",
        choices=[constants.SINGLE_TERM_MODE_CV, constants.SINGLE_TERM_MODE_TOP],
        default=constants.SINGLE_TERM_MODE_CV,
        help="How single term models pick their term",
    )


def manage_fertcast_exceptions(exception):
    if isinstance(exception, FertcastValidationException):
        __logger.error(exception.message)
        if exception.details:
            __logger.error(json.dumps(exception.details, sort_keys=True, indent=4))
        sys.exit(1)
    elif isinstance(exception, FertcastException):
        __logger.error(str(exception.message))
        sys.exit(exception.exit_code)
    else:
        raise exception
