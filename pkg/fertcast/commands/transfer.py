import logging
import os

from dependency_injector.wiring import inject, Provide

import fertcast.loggers
from fertcast import constants
from fertcast.commands import command_commons
from fertcast.di import Container
from fertcast.exceptions import FertcastException
from fertcast.file_manager import FileManager
from fertcast.transfer import build_annual_matrix, build_trend_report, national_truth

__logger = logging.getLogger(__name__)


def __read_inputs(args, file_manager: FileManager):
    try:
        model = file_manager.read_model(args.model)
        panel = file_manager.read_ground_truth_panel(args.truth)
        volumes = {volume.term: volume for volume in file_manager.read_trends_monthly(args.trends)}
    except FileNotFoundError as err:
        raise FertcastException(f"Input file '{err.filename}' not found", exit_code=2) from err
    return model, panel, volumes


@inject
def __transfer(
    args,
    file_manager: FileManager = Provide[Container.file_manager],
    output_dir: str = Provide[Container.config.output_dir],
):
    try:
        fertcast.loggers.configure("INFO" if not args.quiet else "ERROR")

        model, panel, volumes = __read_inputs(args, file_manager)
        variable = args.variable or model.variable
        if not variable or variable not in panel:
            raise FertcastException(
                f"Variable '{variable}' not found in '{args.truth}'. "
                f"Available: {sorted(panel.keys())}"
            )
        years = args.years or sorted(panel[variable].keys())
        missing_years = [year for year in years if year not in panel[variable]]
        if missing_years:
            raise FertcastException(f"No '{variable}' ground truth for years {missing_years}")
        terms = sorted(model.active_terms)
        missing_terms = [term for term in terms if term not in volumes]
        if missing_terms:
            raise FertcastException(f"No monthly trends for model terms {missing_terms}")

        matrix = build_annual_matrix([volumes[term] for term in terms], years)
        truth = national_truth({year: panel[variable][year] for year in years}, args.scale)
        report = build_trend_report(model, matrix, truth, variable=variable)

        file_manager.create_file_tree(output_dir)
        file_manager.write_trends_summary(
            os.path.join(output_dir, constants.FILE_NAME_TREND), [report]
        )
        file_manager.write_plot_data(
            os.path.join(output_dir, constants.FILE_NAME_PLOT_DATA), report
        )
        __logger.info("Temporal correlation for '%s': %.3f", variable, report.r)

    except FertcastException as err:
        command_commons.manage_fertcast_exceptions(err)


def register(subparsers):
    command_parser = subparsers.add_parser(
        "transfer", help="Apply a spatial model to national yearly volumes"
    )
    command_parser.set_defaults(func=__transfer, quiet=False)

    command_commons.register_quiet_arg_option(command_parser)
    command_parser.add_argument(
        "--trends",
        dest="trends",
        required=True,
        help="Path to the monthly national trends CSV",
    )
    command_parser.add_argument(
        "--truth",
        dest="truth",
        required=True,
        help="Path to the yearly ground truth CSV (with a year column)",
    )
    command_parser.add_argument(
        "--model",
        dest="model",
        required=True,
        help="Path to the model file written by fit",
    )
    command_parser.add_argument(
        "--variable",
        dest="variable",
        required=False,
        help="Fertility variable, defaults to the one recorded in the model",
    )
    command_parser.add_argument(
        "--years",
        dest="years",
        type=int,
        nargs="+",
        help="Years to compare, defaults to every year of the ground truth",
    )
    command_parser.add_argument(
        "--scale",
        dest="scale",
        type=float,
        default=constants.DEFAULT_INTENSITY_SCALE,
        help="Multiplier applied to births per woman aged 15-50",
    )
    command_parser.add_argument(
        "-d",
        "--output-dir",
        dest="output_dir",
        required=True,
        env_var=constants.ENV_VAR_OUTPUT_DIR,
        help="Directory for the trend and plot data CSVs",
    )
