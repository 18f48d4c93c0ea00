"""Command line interface: ``critmetrics compute|filter|suitability|simulate``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from typing import Optional, Sequence

from . import pipeline
from .suitability import SuitabilityError, explain, load_knowledge_base, load_requirements, run_suitability

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="critmetrics", description="Criticality metrics for traffic trajectory data.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, with_jobs=True):
        sp.add_argument("-o", "--output", help="output file (default: stdout)")
        sp.add_argument("--seed", type=int, help="override the config seed")
        if with_jobs:
            sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes (default 1)")

    c = sub.add_parser("compute", help="compute metrics over a trajectory table")
    c.add_argument("config")
    c.add_argument("data")
    common(c)
    f = sub.add_parser("filter", help="report critical time intervals")
    f.add_argument("config")
    f.add_argument("data")
    common(f)
    s = sub.add_parser("suitability", help="run the suitability analysis")
    s.add_argument("kb", help="knowledge base document ('default' for the shipped one)")
    s.add_argument("requirements", help="requirements document ('left_turn' for the shipped one)")
    s.add_argument("-o", "--output")
    m = sub.add_parser("simulate", help="simulate actors with a prediction model")
    m.add_argument("model_config")
    common(m, with_jobs=False)
    return p


@contextlib.contextmanager
def _out(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _run(args) -> int:
    if args.command in ("compute", "filter"):
        if args.jobs < 1:
            raise _UsageError("--jobs must be at least 1")
        config = pipeline.load_config(args.config).with_seed(args.seed)
        scenarios = pipeline.parse_trajectories(args.data, config.jerk_window)
        if args.command == "compute":
            rows = pipeline.compute(config, scenarios, jobs=args.jobs)
            with _out(args.output) as fh:
                pipeline.write_results(rows, fh)
        else:
            ivs = pipeline.filter_scenarios(config, scenarios, jobs=args.jobs)
            with _out(args.output) as fh:
                pipeline.write_intervals(ivs, fh)
    elif args.command == "suitability":
        kb = load_knowledge_base(None if args.kb == "default" else args.kb)
        if args.requirements == "left_turn":
            from .suitability import load_left_turn_requirements

            reqs, order = load_left_turn_requirements()
        else:
            reqs, order = load_requirements(args.requirements)
        if not reqs:
            raise SuitabilityError("requirement set is empty")
        with _out(args.output) as fh:
            fh.write(explain(run_suitability(kb, reqs, order)))
    elif args.command == "simulate":
        scenarios = pipeline.simulate(args.model_config)
        with _out(args.output) as fh:
            pipeline.write_trajectories(scenarios, fh)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError(parser.format_usage().rstrip())
        return _run(args)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except (pipeline.DataError, SuitabilityError, OSError, ValueError) as e:
        print(f"critmetrics: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
