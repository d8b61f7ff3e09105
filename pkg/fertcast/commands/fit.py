import logging

from dependency_injector.wiring import inject, Provide

import fertcast.loggers
from fertcast import constants
from fertcast.commands import command_commons
from fertcast.di import Container
from fertcast.exceptions import FertcastException
from fertcast.file_manager import FileManager
from fertcast.models.regression_models import FamilySpec
from fertcast.regression import fit_family, sparsification

__logger = logging.getLogger(__name__)


@inject
def __fit(
    args,
    file_manager: FileManager = Provide[Container.file_manager],
):
    try:
        fertcast.loggers.configure("INFO" if not args.quiet else "ERROR")

        target = command_commons.load_target_from_args(args, file_manager)
        design = command_commons.build_design_from_args(args, file_manager)
        spec = FamilySpec(
            family=args.family,
            lasso=command_commons.lasso_config_from_args(args),
            single_term_mode=args.single_term_mode,
        )
        model = fit_family(spec, design, target)
        file_manager.write_model(args.output, model)

        __logger.info(
            "Fitted %s model for '%s': intercept %s, coefficients %s",
            model.family,
            args.target,
            model.intercept,
            dict(model.coefficients),
        )
        if model.family == constants.MODEL_FAMILY_LASSO:
            __logger.info("Terms removed by the lasso: %s", sparsification(model))

    except FertcastException as err:
        command_commons.manage_fertcast_exceptions(err)


def register(subparsers):
    command_parser = subparsers.add_parser(
        "fit", help="Fit one model family on all regions"
    )
    command_parser.set_defaults(func=__fit, quiet=False)

    command_commons.register_target_arg_options(command_parser)
    command_commons.register_ddof_arg_option(command_parser)
    command_commons.register_lasso_arg_options(command_parser)
    command_commons.register_quiet_arg_option(command_parser)
    command_parser.add_argument(
        "--family",
        dest="family",
        choices=constants.MODEL_FAMILIES,
        required=True,
        help="Model family to fit",
    )
    command_parser.add_argument(
        "--selected",
        dest="selected",
        required=True,
        help="Path to the selected terms CSV written by select",
    )
    command_parser.add_argument(
        "-o",
        "--output",
        dest="output",
        required=True,
        help="Path of the model file to write",
    )
