"""
QRef - Command-Line Entry Point

Run:   python main.py verify --alpha 0.8
       python main.py sweep --alpha-min 0.1 --alpha-max 0.9 --steps 9 --format csv
       python main.py paradox --alpha 0.6 --format json --output paradox.json
       python main.py demo

Exit status: 0 all checks passed, 2 a check failed, 3 invalid arguments,
4 degenerate α, 5 report could not be written.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

# Make the flat modules importable by bare name
sys.path.insert(0, str(Path(__file__).resolve().parent))

from pydantic import ValidationError

from config import TOOL_NAME, VERSION
from errors import ConfigError, QRefError
from models import Command, OutputFormat, ReportDocument, RunConfig
from report import serialize, write_output

from commands import demo, paradox, sweep, verify

log = logging.getLogger(TOOL_NAME)

CHECK_FAILED = 2

COMMANDS = {
    Command.verify:  verify.build_report,
    Command.sweep:   sweep.build_report,
    Command.paradox: paradox.build_report,
    Command.demo:    demo.build_report,
}

HELP = {
    Command.verify:  "Hardy items 1-4 and the invariant suite",
    Command.sweep:   "per-α rows over a grid (default: 97 points in [0.02, 0.98])",
    Command.paradox: "pseudo-probabilities of the overlapping systems",
    Command.demo:    "narrated walkthrough of the postulates at one α",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad input; 2 means a failed check here.
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--alpha", type=float, help="single α in (0, 1) (default 0.8)")
    common.add_argument("--alpha-min", type=float)
    common.add_argument("--alpha-max", type=float)
    common.add_argument("--steps", type=int, help="grid points, endpoints included")
    common.add_argument("--format", dest="output_format", default=OutputFormat.text.value,
                        choices=[f.value for f in OutputFormat])
    common.add_argument("--output", dest="output_path", help="write the report here instead of stdout")
    common.add_argument("--tolerance", dest="tolerance_override", type=float,
                        help="absolute tolerance for closed-form vs simulation checks")
    common.add_argument("--workers", type=int, default=1, help="threads for grid points")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog=TOOL_NAME, description="Quantum reference systems and Hardy's experiment.")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        sub.add_parser(command.value, parents=[common], help=HELP[command])
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    try:
        return RunConfig(
            command=args.command,
            alpha=args.alpha,
            alpha_min=args.alpha_min,
            alpha_max=args.alpha_max,
            steps=args.steps,
            output_format=args.output_format,
            output_path=args.output_path,
            tolerance_override=args.tolerance_override,
            workers=args.workers,
        )
    except ValidationError as exc:
        raise ConfigError("; ".join(e["msg"] for e in exc.errors())) from exc


def run(config: RunConfig) -> Tuple[ReportDocument, int]:
    doc = COMMANDS[config.command](config)
    status = 0 if doc.summary.ok else CHECK_FAILED
    if status:
        log.warning("%d of %d checks failed", doc.summary.failed, doc.summary.total_checks)
    return doc, status


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.verbose)
        config = build_run_config(args)
        doc, status = run(config)
        write_output(serialize(doc, config.output_format), config.output_path, sys.stdout.buffer)
        return status
    except QRefError as exc:
        log.error("%s", exc.detail)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
