import configargparse

from fertcast.di import container_instance
from fertcast import __version__
from fertcast.commands import correlate, evaluate, fit, run, select, synth, transfer


def __build_args_parser():
    parser = configargparse.ArgumentParser(prog="fertcast")
    subparsers = parser.add_subparsers(dest="command", required=True)
    correlate.register(subparsers)
    select.register(subparsers)
    fit.register(subparsers)
    evaluate.register(subparsers)
    transfer.register(subparsers)
    synth.register(subparsers)
    run.register(subparsers)
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    return parser


def main():
    args = __build_args_parser().parse_args()

    container_instance.config.from_dict(args.__dict__)
    container_instance.wire(
        modules=[
            __name__,
            correlate.__name__,
            select.__name__,
            fit.__name__,
            evaluate.__name__,
            transfer.__name__,
            synth.__name__,
            run.__name__,
        ]
    )

    args.func(args)


if __name__ == "__main__":
    main()
