from symorbit.cli import RunConfig, run
from symorbit.errors import ConfigError
from symorbit.logger import Logger
from symorbit.utils import load_config

import argparse
import sys
from colorama import init
init()

logger = Logger("symorbit")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="Zero threshold (relative) for signatures")
    common.add_argument("--seed", type=int, help="Seed for random instances and paths")
    common.add_argument("--k-max", type=int, help="Largest iterate to evaluate")
    common.add_argument("--output", "-o", type=str, help="Write the document to this file")
    common.add_argument("--config", "-c", type=str, default="config.json", help="Path to config file")
    common.add_argument("--quiet", "-q", default=False, action="store_true", help="Only log warnings and errors")

    parser = argparse.ArgumentParser(
        description="Hörmander indices of symmetric periodic orbits and their iterates")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    index = subparsers.add_parser("index", parents=[common], help="Indices of given return map blocks")
    index.add_argument("input", nargs="?", default="-", help="Blocks JSON file (default: stdin)")
    index.add_argument("--method", choices=["formula", "qform", "paths", "both", "all"], default="formula")

    verify = subparsers.add_parser("verify", parents=[common], help="Compare methods on random return maps")
    verify.add_argument("--n", type=int, default=2, help="Half dimension of the return maps")
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--methods", type=str, help="Comma separated, e.g. formula,qform,paths")

    cheb = subparsers.add_parser("cheb", parents=[common], help="Chebyshev table as CSV")
    cheb.add_argument("--k", type=int, action="append", help="Degree (repeatable)")
    cheb.add_argument("--points", type=int, default=21, help="Grid points on [-1, 1]")

    orbit = subparsers.add_parser("orbit", parents=[common], help="Reduce a symmetric orbit and index it")
    orbit.add_argument("--system", type=str, required=True,
                       help="oscillator:OMEGA1:OMEGA2 or henon-heiles:ENERGY")
    orbit.add_argument("--seed-point", type=str, help="JSON array, a point on Fix(rho)")
    orbit.add_argument("--half-period", type=float, help="Initial guess for the half-period")
    orbit.add_argument("--orbit-tol", type=float, help="Shooting tolerance")
    orbit.add_argument("--method", choices=["formula", "qform", "paths", "both", "all"], default="both")

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.quiet:
        Logger.quiet = True

    # application config, flags override file values
    settings = load_config(args.config)

    options = {
        key: value for key, value in vars(args).items()
        if key not in ("subcommand", "tol", "seed", "k_max", "output", "config", "quiet")
    }
    if args.subcommand == "verify" and args.methods:
        options["methods"] = args.methods.split(",")
    if args.subcommand == "cheb":
        options["degrees"] = options.pop("k")

    try:
        config = RunConfig(
            args.subcommand,
            args.tol if args.tol is not None else settings["tol"],
            args.seed if args.seed is not None else settings["seed"],
            args.k_max if args.k_max is not None else settings["k_max"],
            output_path=args.output,
            options=options,
            settings=settings
        )
    except ConfigError as e:
        logger.error(str(e))
        return 1

    return run(config, sys.stdin)


if __name__ == "__main__":
    sys.exit(main())
