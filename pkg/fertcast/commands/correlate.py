import logging

from dependency_injector.wiring import inject, Provide

import fertcast.loggers
from fertcast import constants
from fertcast.commands import command_commons
from fertcast.correlation_search import build_corpus, cross_check_export, top_k_correlated
from fertcast.di import Container
from fertcast.exceptions import FertcastException
from fertcast.file_manager import FileManager

__logger = logging.getLogger(__name__)


@inject
def __correlate(
    args,
    file_manager: FileManager = Provide[Container.file_manager],
):
    try:
        fertcast.loggers.configure("INFO" if not args.quiet else "ERROR")

        target = command_commons.load_target_from_args(args, file_manager)
        try:
            rows = file_manager.read_correlate_export(
                args.corpus, regions=target.regions, ddof=args.ddof
            )
        except FileNotFoundError as err:
            raise FertcastException(
                f"Corpus file '{args.corpus}' not found", exit_code=2
            ) from err

        if args.check_stored_r:
            cross_check_export(rows, target)
            __logger.info("Stored correlations of %d terms verified", len(rows))

        corpus = build_corpus([(row.term, row.z_series) for row in rows])
        ranked = top_k_correlated(corpus, target, args.k)
        file_manager.write_correlate_export(args.output, ranked, corpus.region_order)
        __logger.info(
            "Wrote the top %d of %d terms for '%s' to %s",
            len(ranked),
            len(corpus),
            args.target,
            args.output,
        )

    except FertcastException as err:
        command_commons.manage_fertcast_exceptions(err)


def register(subparsers):
    command_parser = subparsers.add_parser(
        "correlate", help="Rank corpus terms by correlation with a fertility variable"
    )
    command_parser.set_defaults(func=__correlate, quiet=False)

    command_commons.register_target_arg_options(command_parser)
    command_commons.register_ddof_arg_option(command_parser)
    command_commons.register_quiet_arg_option(command_parser)
    command_parser.add_argument(
        "--corpus",
        dest="corpus",
        required=True,
        help="Path to the correlate export with the per-region term series",
    )
    command_parser.add_argument(
        "-k",
        dest="k",
        type=int,
        default=constants.DEFAULT_TOP_K,
        help="Number of terms to keep",
    )
    command_parser.add_argument(
        "-o",
        "--output",
        dest="output",
        required=True,
        help="Path of the ranked terms CSV to write",
    )
    command_parser.add_argument(
        "--check-stored-r",
        dest="check_stored_r",
        action="store_true",
        help="Verify the correlations stored in the corpus against the target",
    )
