"""``almpc`` command line: run, compare, plot, selftest.

Exit codes: 0 success, 1 unexpected error, 2 bad configuration,
3 infeasibility abort, 4 I/O error. Set ``ALMPC_LOG=INFO`` (or ``DEBUG``)
for progress logging on stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import parse_config
from .errors import (ConfigError, InfeasibleInitializationError, InfeasibleMpcError,
                     InfeasibleTighteningError)
from .export import export_run, load_run
from .simulator import compare_runs, run_experiment
from .svg import render_svg

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3, 4

log = logging.getLogger("almpc")


def _parser():
    ap = argparse.ArgumentParser(prog="almpc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb, text in (("run", "run one adaptive experiment"),
                       ("compare", "run adaptive and fixed-set experiments on one noise sequence")):
        p = sub.add_parser(verb, help=text)
        p.add_argument("-c", "--config", required=True, help="experiment JSON file")
        p.add_argument("-o", "--out", required=True, help="output directory")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="replace a config field (JSON value; repeatable)")
        p.add_argument("--no-svg", action="store_true", help="skip figure rendering")
    p = sub.add_parser("plot", help="re-render figures from an exported run directory")
    p.add_argument("-o", "--out", required=True,
                   help="directory written by run, or by compare (has almpc/ and rlmpc/)")
    p = sub.add_parser("selftest", help="run the built-in closed-form checks")
    p.add_argument("-v", "--verbose", action="store_true")
    return ap


def _summarize(name, result):
    last = result.logs[-1]
    print(f"{name}: {len(result.logs) - 1} iterations, final nominal cost "
          f"{last.iter_cost_nominal:.6g}, realized cost {last.iter_cost_realized:.6g}")


def cmd_run(args):
    cfg = parse_config(args.config, args.override)
    result = run_experiment(cfg)
    export_run(result, args.out)
    if not args.no_svg:
        render_svg(result, out_dir=args.out)
    _summarize("ALMPC", result)
    return EXIT_OK


def cmd_compare(args):
    cfg = parse_config(args.config, args.override)
    almpc, rlmpc = compare_runs(cfg)
    out = Path(args.out)
    export_run(almpc, out / "almpc")
    export_run(rlmpc, out / "rlmpc")
    if not args.no_svg:
        render_svg(almpc, rlmpc, out)
    _summarize("ALMPC", almpc)
    _summarize("RLMPC", rlmpc)
    return EXIT_OK


def cmd_plot(args):
    out = Path(args.out)
    if (out / "almpc").is_dir() and (out / "rlmpc").is_dir():
        render_svg(load_run(out / "almpc"), load_run(out / "rlmpc"), out)
    else:
        render_svg(load_run(out), out_dir=out)
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest
    passed, failed = run_selftest(verbose=args.verbose)
    print(f"selftest: {passed} passed, {len(failed)} failed")
    return EXIT_OK if not failed else EXIT_ERROR


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "plot": cmd_plot,
            "selftest": cmd_selftest}


def main(argv=None):
    level = os.environ.get("ALMPC_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleMpcError, InfeasibleTighteningError,
            InfeasibleInitializationError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(f"diagnostics: {diag}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:
        log.debug("unexpected failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
