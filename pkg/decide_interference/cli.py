# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Command-line entry point: simulate, sweep, invert, rates and thruster.
Machine output goes to stdout (or --out); diagnostics go to stderr.
Exit codes: 0 success, 2 invalid scenario, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import __version__
from .config.defaults import THRUSTER, app_description, app_title
from .core import CONSTANTS
from .exceptions import DecideError, OutputError, ScenarioValidationError
from .utils import configure_logging, dump_json, log_error, logger, parse_quantity

AXIS_DIMENSIONS = {
    "env-temp": "temperature",
    "internal-temp": "temperature",
    "pressure": "pressure",
    "csl-lambda": "rate",
}


def _emit(text: str, path: str | None = None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}")


def _quantity(value: str, dimension: str, field: str) -> float:
    """Command-line quantity: a plain number in SI or a unit string"""
    try:
        return float(value)
    except ValueError:
        return parse_quantity(value, dimension, field)


def _load(args):
    from .scenario import load_scenario

    scenario, sweep, resolved = load_scenario(args.scenario)
    if args.seed is not None:
        detection = dataclasses.replace(scenario.detection, seed=args.seed)
        scenario = dataclasses.replace(scenario, detection=detection)
    return scenario, sweep, resolved


def _envelope(resolved, scenario, result, seed=None, warnings=None) -> dict:
    """Every JSON payload embeds the resolved scenario and the applied defaults"""
    from .scenario import scenario_to_dict

    return {
        "version": __version__,
        "constants": dataclasses.asdict(CONSTANTS),
        "scenario": scenario_to_dict(resolved),
        "metadata": {"defaults": dict(scenario.defaults), "seed": seed, "warnings": list(warnings or [])},
        "result": result,
    }


# -----------------------------
# Subcommands
# -----------------------------

def cmd_simulate(args) -> int:
    from .protocol import run_protocol

    scenario, _, resolved = _load(args)
    result = run_protocol(scenario)
    payload = _envelope(resolved, scenario, result.summary(), args.seed, result.metadata["warnings"])
    payload["metadata"]["timing"] = result.metadata["timing"]
    payload["metadata"]["separation_path"] = result.metadata["separation_path"]
    if args.pattern_out:
        _emit(result.pattern.to_csv(), args.pattern_out)
    _emit(dump_json(payload), args.out)
    return 0


def cmd_sweep(args) -> int:
    from .protocol import run_sweep

    scenario, sweep, resolved = _load(args)
    if sweep is None:
        raise ScenarioValidationError("the scenario has no sweep section", "sweep")
    if args.jobs < 1:
        raise ScenarioValidationError(f"must be at least 1, got {args.jobs}", "--jobs")
    outcome = run_sweep(resolved, sweep, jobs=args.jobs, seed=args.seed)
    _emit(outcome["csv"], args.out)
    return 0


def cmd_invert(args) -> int:
    from .requirements import invert

    scenario, _, resolved = _load(args)
    bracket = None
    if args.bracket:
        dimension = AXIS_DIMENSIONS[args.axis]
        bracket = tuple(_quantity(v, dimension, "--bracket") for v in args.bracket)
    result = invert(scenario, args.axis, threshold=args.threshold, bracket=bracket)
    _emit(dump_json(_envelope(resolved, scenario, result, args.seed)), args.out)
    return 0


def cmd_rates(args) -> int:
    from .decoherence import decoherence_budget
    from .protocol import budget_summary

    scenario, _, resolved = _load(args)
    budget = decoherence_budget(scenario)
    if args.table:
        _emit(rates_table(budget), args.out)
    else:
        _emit(dump_json(_envelope(resolved, scenario, budget_summary(budget))), args.out)
    return 0


def rates_table(budget) -> str:
    """Aligned text table of the decoherence budget"""
    header = ("channel", "Lambda [1/(m^2 s)]", "gamma_sat [1/s]", "exponent t1", "exponent t2")
    rows = [
        (name, f"{Lambda:.6e}", f"{gamma:.6e}", f"{e1:.6e}", f"{e2:.6e}")
        for name, Lambda, gamma, e1, e2 in budget.rows()
    ]
    rows.append(("total", "", "", f"{budget.totals['t1']:.6e}", f"{budget.totals['t2']:.6e}"))
    widths = [max(len(str(row[i])) for row in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(str(cell).ljust(width) for cell, width in zip(row, widths)).rstrip() for row in [header, *rows]]
    lines.append(f"separation {budget.separation:.6e} m, internal temperature {budget.internal_temperature:.6g} K")
    lines.append(
        f"gas: rate {budget.gas['rate']:.6e} 1/s, expected events {budget.gas['expected_events']:.6e}, "
        f"survival {budget.gas['survival']:.6f}"
    )
    return "\n".join(lines) + "\n"


def cmd_thruster(args) -> int:
    from .requirements import thruster_requirement

    result = thruster_requirement(
        force_noise=_quantity(args.force_noise, "force_noise", "--force-noise"),
        spacecraft_mass=_quantity(args.mass, "mass", "--mass"),
        quoted_bound=args.quoted,
    )
    payload = {"version": __version__, "result": result, "metadata": {"warnings": result["warnings"]}}
    _emit(dump_json(payload), args.out)
    return 0


# -----------------------------
# Parser
# -----------------------------

def _seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}")
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decide-sim", description=f"{app_title}: {app_description}")
    parser.add_argument(
        "--version", action="version", version=f"decide-sim {__version__} (constants: {CONSTANTS.provenance})"
    )
    parser.add_argument("--seed", type=_seed, default=None, help="Monte Carlo detection seed (u64)")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="run one scenario: pattern and visibilities as JSON")
    simulate.add_argument("scenario")
    simulate.add_argument("--pattern-out", default=None, help="write the detected pattern as CSV")
    simulate.add_argument("--out", default=None)
    simulate.set_defaults(handler=cmd_simulate)

    sweep = commands.add_parser("sweep", help="evaluate the scenario's sweep section as CSV")
    sweep.add_argument("scenario")
    sweep.add_argument("--out", default=None)
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    sweep.set_defaults(handler=cmd_sweep)

    invert = commands.add_parser("invert", help="critical value along a requirement axis")
    invert.add_argument("scenario")
    invert.add_argument("--axis", required=True, choices=sorted(AXIS_DIMENSIONS))
    invert.add_argument("--threshold", type=float, default=None)
    invert.add_argument("--bracket", nargs=2, metavar=("LO", "HI"), default=None, help='e.g. "1 K" "100 K"')
    invert.add_argument("--out", default=None)
    invert.set_defaults(handler=cmd_invert)

    rates = commands.add_parser("rates", help="decoherence budget")
    rates.add_argument("scenario")
    rates.add_argument("--table", action="store_true", help="aligned text table instead of JSON")
    rates.add_argument("--out", default=None)
    rates.set_defaults(handler=cmd_rates)

    thruster = commands.add_parser("thruster", help="thruster force noise to acceleration noise")
    thruster.add_argument("--force-noise", default=str(THRUSTER["force_noise"]), help='e.g. "1 uN/sqrt(Hz)"')
    thruster.add_argument("--mass", default=str(THRUSTER["spacecraft_mass"]), help='e.g. "700 kg"')
    thruster.add_argument("--quoted", type=float, default=THRUSTER["quoted_bound"])
    thruster.add_argument("--out", default=None)
    thruster.set_defaults(handler=cmd_thruster)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except DecideError as exc:
        log_error(str(exc), f"decide-sim {args.command} failed")
        return exc.exit_code
    except Exception as exc:
        logger("cli").exception(f"unexpected failure: {exc}")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
