"""Command line: ``greenlink simulate --scenario FILE --duration-ms N ...``.

Exit codes: 0 all expectations passed, 2 an expectation failed,
3 bad scenario or arguments, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from ..btlink import LinkImpairments
from .scenario import ScenarioError, load_scenario
from .sim import Simulation
from .trace import emit_trace

EXIT_OK = 0
EXIT_EXPECT_FAILED = 2
EXIT_PARSE_ERROR = 3
EXIT_IO_ERROR = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE_ERROR, f"{self.prog}: error: {message}\n")


def _positive_int(s):
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0: {s}")
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {s}")
    return v


def _prob(s):
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0,1]: {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="greenlink", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("simulate", help="run a scenario through the two-node simulator")
    p.add_argument("--scenario", required=True, metavar="FILE")
    p.add_argument("--duration-ms", required=True, type=_positive_int, metavar="N")
    p.add_argument("--seed", type=int, default=1, metavar="S")
    p.add_argument("--baud", type=_positive_int, default=9600)
    p.add_argument("--latency-ms", type=_nonneg_int, default=0)
    p.add_argument("--drop-prob", type=_prob, default=0.0)
    p.add_argument("--bit-error-prob", type=_prob, default=0.0)
    p.add_argument("--trace", metavar="PATH|-", help="write the event trace to PATH, or stdout for '-'")
    p.add_argument("--snapshot-every", type=_positive_int, metavar="MS",
                   help="emit both displays and link counters every MS")
    p.add_argument("--skip-config", action="store_true",
                   help="start with the HC-05 pair already configured and paired")
    p.add_argument("--report-json", action="store_true",
                   help="print machine-readable counters as JSON on stdout")
    return parser


def simulate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except (OSError, UnicodeDecodeError) as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR

    sim = Simulation(
        scenario,
        seed=args.seed,
        baud=args.baud,
        impairments=LinkImpairments(args.latency_ms, args.drop_prob, args.bit_error_prob),
        skip_config=args.skip_config,
        snapshot_every=args.snapshot_every,
    )
    report = sim.run(args.duration_ms)

    try:
        if args.trace == "-":
            emit_trace(report.trace, sys.stdout)
        elif args.trace:
            with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
                emit_trace(report.trace, fh)
        if args.report_json:
            print(report.summary(), file=sys.stderr)
            sys.stdout.write(json.dumps(report.to_json_dict(), sort_keys=True) + "\n")
        else:
            print(report.summary())
        sys.stdout.flush()
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR
    return report.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return simulate(args)
    return EXIT_PARSE_ERROR  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
