import logging

from dependency_injector.wiring import inject, Provide

import fertcast.loggers
from fertcast import constants
from fertcast.commands import command_commons
from fertcast.di import Container
from fertcast.evaluation import choose_model, loocv
from fertcast.exceptions import FertcastException
from fertcast.file_manager import FileManager
from fertcast.models.regression_models import FamilySpec

__logger = logging.getLogger(__name__)


@inject
def __evaluate(
    args,
    file_manager: FileManager = Provide[Container.file_manager],
):
    try:
        fertcast.loggers.configure("INFO" if not args.quiet else "ERROR")

        if not args.loocv:
            raise FertcastException("Only leave-one-out evaluation is available. Pass --loocv")
        if args.jobs < 1:
            raise FertcastException(f"--jobs must be positive, got {args.jobs}")

        target = command_commons.load_target_from_args(args, file_manager)
        design = command_commons.build_design_from_args(args, file_manager)
        lasso = command_commons.lasso_config_from_args(args)
        families = args.families or constants.MODEL_FAMILIES
        reports = [
            loocv(
                design,
                target,
                FamilySpec(
                    family=family, lasso=lasso, single_term_mode=args.single_term_mode
                ),
                jobs=args.jobs,
            )
            for family in families
        ]
        file_manager.write_evaluation(args.output, reports, args.scale)

        if any(family != constants.MODEL_FAMILY_CONSTANT for family in families):
            __logger.info("Best family for '%s': %s", args.target, choose_model(reports))

    except FertcastException as err:
        command_commons.manage_fertcast_exceptions(err)


def register(subparsers):
    command_parser = subparsers.add_parser(
        "evaluate", help="Cross-validate model families on the selected terms"
    )
    command_parser.set_defaults(func=__evaluate, quiet=False)

    command_commons.register_target_arg_options(command_parser)
    command_commons.register_ddof_arg_option(command_parser)
    command_commons.register_lasso_arg_options(command_parser)
    command_commons.register_quiet_arg_option(command_parser)
    command_parser.add_argument(
        "--loocv",
        dest="loocv",
        action="store_true",
        help="Leave-one-region-out cross-validation",
    )
    command_parser.add_argument(
        "--family",
        dest="families",
        action="append",
        choices=constants.MODEL_FAMILIES,
        help="Model family to evaluate. Repeatable, defaults to all of them",
    )
    command_parser.add_argument(
        "--selected",
        dest="selected",
        required=True,
        help="Path to the selected terms CSV written by select",
    )
    command_parser.add_argument(
        "-j",
        "--jobs",
        dest="jobs",
        type=int,
        default=1,
        help="Worker threads running the folds",
    )
    command_parser.add_argument(
        "-o",
        "--output",
        dest="output",
        required=True,
        help="Path of the evaluation CSV to write",
    )
