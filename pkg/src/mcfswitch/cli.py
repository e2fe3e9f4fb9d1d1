"""Command-line entry point.

Every subcommand writes its artifacts to ``--out`` and prints the metrics
as JSON on stdout. Validation failures print a JSON error object on stderr
and exit with status 2.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import calibration as cal
from .config import ConfigError, ScenarioConfig, load_config
from .field import ContractError
from .metrics import MetricError
from .output import dumps_report, write_result
from .scenario import SCENARIOS, run_fringe_characterization

EXIT_INVALID = 2

# which config field --duration sets for each subcommand
DURATION_FIELD = {
    "stabilize": ("scenario", "duration_s"),
    "switch": ("switching", "duration_s"),
    "ber-sweep": ("ber", "stabilize_s"),
    "wdm-sweep": ("wdm", "stabilize_s"),
    "network": ("network", "duration_s"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="INI config file (defaults used when omitted)")
    common.add_argument("--seed", type=int, help="override [scenario] seed")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    common.add_argument("--duration", type=float, metavar="S", help="override the run length in seconds")

    parser = _Parser(prog="mcfswitch", description="Multicore-fiber core-selective switch simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "stabilize": "free-running drift followed by closed-loop stabilization",
        "switch": "round-robin core switching at the control rate",
        "ber-sweep": "per-core BER curves, crosstalk penalty and Monte-Carlo check",
        "wdm-sweep": "output visibility across wavelength with phases locked at the reference",
        "network": "two loopback links with a switch-over mid-run",
        "calibrate": "rerun the calibration fits and the static device characterization",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def apply_overrides(cfg: ScenarioConfig, command: str, seed: int | None, duration: float | None) -> ScenarioConfig:
    if seed is not None:
        cfg = cfg.with_seed(seed)
    if duration is not None:
        if command not in DURATION_FIELD:
            raise ConfigError(f"--duration does not apply to '{command}'")
        section, key = DURATION_FIELD[command]
        cfg = dataclasses.replace(cfg, **{section: dataclasses.replace(getattr(cfg, section), **{key: duration})})
    return cfg.validate()


def run_calibrate(cfg: ScenarioConfig, out: Path) -> dict:
    fits = cal.run_all(cfg.device.splitter)
    fit_record = {
        name: {"fitted": r.value, "stored": cal.CALIBRATED[name], "achieved": r.achieved}
        for name, r in fits.items()
    }
    result = dataclasses.replace(run_fringe_characterization(cfg), name="calibrate")
    return write_result(result, cfg, out, extra={"fits": fit_record, "targets": dict(cal.TARGETS)})


def _error(kind: str, message: str, **detail) -> int:
    err = {"error": {"type": kind, "message": message, **{k: v for k, v in detail.items() if v is not None}}}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return EXIT_INVALID


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _error("usage", str(exc))
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.command, args.seed, args.duration)
        if args.command == "calibrate":
            report = run_calibrate(cfg, args.out)
        else:
            report = write_result(SCENARIOS[args.command](cfg), cfg, args.out)
    except ConfigError as exc:
        return _error("config", str(exc), section=exc.section, key=exc.key)
    except FileNotFoundError as exc:
        return _error("file", str(exc))
    except (ContractError, MetricError) as exc:
        return _error("validation", str(exc))
    summary = {k: report[k] for k in ("scenario", "seed", "config_hash", "metrics", "files")}
    summary["out"] = str(args.out)
    sys.stdout.write(dumps_report(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
