"""Command-line entry point.

Exit codes: 0 success, 1 unexpected error, 2 invalid configuration or
arguments, 3 training diverged, 4 L-BFGS subsolver failure (only when
``optim.abort_on_subsolver_failure = true``).
"""

import argparse
import sys

from .config import Config, load_config
from .errors import ConfigError
from .experiments import COMMANDS, EXIT_CONFIG, run_experiment


def build_parser():
    parser = argparse.ArgumentParser(prog="igdpinn", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value configuration file (defaults if omitted)")
    parser.add_argument("--out", help="output directory (overrides the output key)")
    parser.add_argument("--seed", type=int, help="override the seed key")
    parser.add_argument("--workers", type=int, help="cap BLAS/OpenMP threads; 1 is bit-reproducible")
    parser.add_argument("--plot", action="store_true", help="also render PNG figures into the output directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else Config()
        if args.seed is not None:
            cfg = cfg.with_values(seed=args.seed)
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers", "must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers is not None:
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=args.workers):
            return run_experiment(args.command, cfg, args.out, args.plot)
    return run_experiment(args.command, cfg, args.out, args.plot)


if __name__ == "__main__":
    sys.exit(main())
