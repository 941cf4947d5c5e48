"""Command-line entry point: ``resex <subcommand> [--config PATH] ...``.

Seed precedence: ``--seed``, then ``RESEX_SEED``, then ``[noise] seed`` in
the config, then the experiment's fixed default.  Exit codes: 0 success,
2 config error, 3 numeric failure.
"""

import argparse
import os
import sys

import numpy as np

from . import config as C
from .evolution import PropagationError
from .experiments import DEFAULT_SEEDS, RUNNERS, default_config
from .metrics import BranchCutError
from .models import ModelError
from .noise import NoiseError
from .operators import OperatorError
from .output import write_csv, write_svg_for_csv
from .scheduling import ScheduleError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (PropagationError, BranchCutError, ModelError, NoiseError, OperatorError,
                  ScheduleError, FloatingPointError, np.linalg.LinAlgError, ArithmeticError)


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="resex", description="Residual-exchange gate experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "dqd-coeffs": "Pauli coefficients of the driven double dot over time",
        "dqd-fid": "single-drive and ZX-composed IY infidelity versus J",
        "chain-y": "Y gate on one chain site: time traces and optimal times",
        "chain-simul": "simultaneous versus sequential Y gates on 3/5/7-site chains",
        "swap": "SWAP fidelity and error-matrix coefficients on a 4-site block",
        "report": "PTM, error generator and Pauli error coefficients of one gate",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", metavar="PATH", help="scenario file (INI or JSON)")
        sp.add_argument("--seed", type=_u64, help="64-bit seed (overrides RESEX_SEED)")
        sp.add_argument("--svg", action="store_true", help="also write an SVG per CSV")
        sp.add_argument("--evaluator", choices=("analytic", "oracle"), default="analytic")
        sp.add_argument("--out", metavar="PREFIX", help="output path prefix")
        sp.add_argument("--dump-config", action="store_true",
                        help="print the effective config and exit")
    return ap


def resolve_seed(args, cfg):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("RESEX_SEED")
    if env:
        try:
            return _u64(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise C.ConfigError([f"RESEX_SEED={env!r} is not a 64-bit unsigned integer"]) from None
    if cfg.noise is not None:
        return cfg.noise.seed
    return DEFAULT_SEEDS[cfg.experiment]


def run(args):
    if args.config:
        cfg = C.load(args.config)
        if cfg.experiment != args.command:
            raise C.ConfigError([f"config is for {cfg.experiment!r}, not {args.command!r}"])
    else:
        cfg = default_config(args.command)
    if args.out:
        cfg.output = args.out
    if args.dump_config:
        sys.stdout.write(C.dumps(cfg))
        return []
    seed = resolve_seed(args, cfg)
    C.check_output(cfg.output)
    with np.errstate(invalid="raise", divide="raise", over="raise"):
        tables = RUNNERS[args.command](cfg, seed, args.evaluator)
    written = []
    for table in tables:
        path = f"{cfg.output}_{table.name}.csv"
        write_csv(table, path)
        written.append(path)
        if args.svg and table.rows and not isinstance(table.rows[0][0], str):
            svg = path[:-4] + ".svg"
            hints = {k: v for k, v in table.plot.items() if k in ("logx", "logy", "markers")}
            write_svg_for_csv(path, svg, title=f"{args.command} {table.name}", **hints)
            written.append(svg)
    return written


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        written = run(args)
    except C.ConfigError as exc:
        print(f"resex: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"resex: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
