import logging

import marshmallow.exceptions
from dependency_injector.wiring import inject, Provide

import fertcast.loggers
from fertcast import constants
from fertcast.commands import command_commons
from fertcast.di import Container
from fertcast.exceptions import FertcastException, FertcastValidationException
from fertcast.models.config_models import SynthConfig, SynthConfigSchema
from fertcast.synthetic import SyntheticGenerator

__logger = logging.getLogger(__name__)


def __synth_config_from_args(args, output_dir: str) -> SynthConfig:
    data = {
        "output-dir": output_dir,
        "seed": args.seed,
        "regions": args.regions,
        "terms": args.terms,
        "planted": args.planted,
        "noise": args.noise,
    }
    if args.variables:
        data["variables"] = args.variables
    if args.years:
        data["years"] = args.years
    try:
        return SynthConfigSchema().load(data)
    except marshmallow.exceptions.ValidationError as err:
        raise FertcastValidationException(
            "Validation issues in synthetic data options", err.messages_dict
        ) from err


@inject
def __synth(
    args,
    synthetic_generator: SyntheticGenerator = Provide[Container.synthetic_generator],
    output_dir: str = Provide[Container.config.output_dir],
):
    try:
        fertcast.loggers.configure("INFO" if not args.quiet else "ERROR")

        manifest = synthetic_generator.generate(__synth_config_from_args(args, output_dir))
        for variable, planted in manifest["planted"].items():
            __logger.info(
                "Planted for '%s': %s", variable, [entry["term"] for entry in planted]
            )

    except FertcastException as err:
        command_commons.manage_fertcast_exceptions(err)


def register(subparsers):
    command_parser = subparsers.add_parser(
        "synth", help="Generate a synthetic dataset with planted signal"
    )
    command_parser.set_defaults(func=__synth, quiet=False)

    command_commons.register_quiet_arg_option(command_parser)
    command_parser.add_argument(
        "--seed", dest="seed", type=int, default=0, help="Random generator seed"
    )
    command_parser.add_argument(
        "--regions", dest="regions", type=int, default=51, help="Number of regions"
    )
    command_parser.add_argument(
        "--terms", dest="terms", type=int, default=200, help="Number of corpus terms"
    )
    command_parser.add_argument(
        "--planted",
        dest="planted",
        type=int,
        default=3,
        help="Planted terms per fertility variable",
    )
    command_parser.add_argument(
        "--noise",
        dest="noise",
        type=float,
        default=0.6,
        help="Noise level of the planted terms",
    )
    command_parser.add_argument(
        "--variables",
        dest="variables",
        nargs="+",
        choices=list(constants.REFERENCE_VARIABLES.keys()),
        help="Fertility variables to generate, all of them by default",
    )
    command_parser.add_argument(
        "--years",
        dest="years",
        type=int,
        nargs="+",
        help="Years of the generated panel, 2010 to 2015 by default",
    )
    command_parser.add_argument(
        "-d",
        "--output-dir",
        dest="output_dir",
        required=True,
        env_var=constants.ENV_VAR_OUTPUT_DIR,
        help="Directory for the generated files",
    )
