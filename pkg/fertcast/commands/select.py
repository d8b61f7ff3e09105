import logging

from dependency_injector.wiring import inject, Provide

import fertcast.loggers
from fertcast import constants
from fertcast.commands import command_commons
from fertcast.correlation_search import select_terms
from fertcast.di import Container
from fertcast.exceptions import FertcastException
from fertcast.file_manager import FileManager
from fertcast.models.correlate_models import Lexicon, SelectionConfig

__logger = logging.getLogger(__name__)


def __load_lexicon(args, file_manager: FileManager) -> Lexicon:
    if not args.lexicon:
        return Lexicon()
    try:
        return file_manager.read_lexicon(args.lexicon)
    except FileNotFoundError as err:
        raise FertcastException(
            f"Lexicon file '{args.lexicon}' not found", exit_code=2
        ) from err


@inject
def __select(
    args,
    file_manager: FileManager = Provide[Container.file_manager],
):
    try:
        fertcast.loggers.configure("INFO" if not args.quiet else "ERROR")

        if args.max_terms < 1:
            raise FertcastException(f"--max-terms must be positive, got {args.max_terms}")
        ranked = command_commons.load_ranked_terms(args.ranked, file_manager, args.ddof)
        config = SelectionConfig(
            max_terms=args.max_terms,
            lexicon=__load_lexicon(args, file_manager),
            dedup_plural=not args.keep_plurals,
            min_r=args.min_r,
        )
        selected = select_terms(ranked, config)
        if not selected:
            __logger.warning("No relevant term selected. The variable would be dropped")
        region_order = ranked[0].z_series.regions if ranked else ()
        file_manager.write_correlate_export(args.output, selected, region_order)
        __logger.info("Selected terms: %s", [term.term for term in selected])

    except FertcastException as err:
        command_commons.manage_fertcast_exceptions(err)


def register(subparsers):
    command_parser = subparsers.add_parser(
        "select", help="Filter ranked terms down to the relevant candidates"
    )
    command_parser.set_defaults(func=__select, quiet=False)

    command_commons.register_ddof_arg_option(command_parser)
    command_commons.register_quiet_arg_option(command_parser)
    command_parser.add_argument(
        "--ranked",
        dest="ranked",
        required=True,
        help="Path to the ranked terms CSV written by correlate",
    )
    command_parser.add_argument(
        "--lexicon",
        dest="lexicon",
        required=False,
        help="Path to the YAML lexicon with allow and block stems",
    )
    command_parser.add_argument(
        "--max-terms",
        dest="max_terms",
        type=int,
        default=constants.DEFAULT_MAX_TERMS,
        help="Maximum number of selected terms",
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
        "-o",
        "--output",
        dest="output",
        required=True,
        help="Path of the selected terms CSV to write",
    )
