"""
Command line front end.

    python -m src.cli stats    --data PATH [--out PATH]
    python -m src.cli burnin   --config PATH [--data PATH] [--seed N] [--out PATH]
    python -m src.cli sweep    --config PATH [--vary a2b2|a1b1] [--from X --to Y --points N] [--out PATH]
    python -m src.cli simulate --config PATH [--iterations N] [--seed N] [--out PATH]
    python -m src.cli validate --config PATH [--suite NAME] [--out PATH]

Exit codes: 0 success, 1 certificate or data failure, 2 I/O or configuration
problem.
"""
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from .burnin_engine import BurninEngine
from .config import EXIT_CERTIFICATE_FAILURE, EXIT_IO_ERROR, EXIT_OK, SuiteStatus, SweepParameter
from .csv_adapter import read_raw_csv, write_sweep_csv, write_trace_csv
from .errors import BurninError, ConfigError
from .models.schema import RunConfig, SweepSpec
from .report import render_report
from .suites import SUITES

logger = logging.getLogger("Burnin_CLI")


def _validation_message(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        location = ".".join(str(p) for p in err["loc"]) or "config"
        parts.append(f"{location}: {err['msg']}")
    return "; ".join(parts)


def parse_config(raw: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {_validation_message(exc)}") from exc


def load_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Read and validate a JSON run configuration.

    A relative data path is taken relative to the configuration file.
    Overrides replace top-level keys before validation.
    """
    with open(path) as handle:
        text = handle.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            {"line": exc.lineno, "column": exc.colno},
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")

    data = raw.get("data")
    if isinstance(data, dict) and isinstance(data.get("path"), str) and not os.path.isabs(data["path"]):
        data["path"] = os.path.join(os.path.dirname(os.path.abspath(path)), data["path"])
    raw.update(overrides or {})
    return parse_config(raw)


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as handle:
        handle.write(text)
    logger.info(f"wrote {path}")


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    if getattr(args, "data", None):
        out["data"] = {"path": os.path.abspath(args.data)}
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    return out


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def cmd_stats(args: argparse.Namespace) -> int:
    if args.data:
        dataset = read_raw_csv(args.data)
    elif args.config:
        dataset = BurninEngine(load_config(args.config)).dataset
    else:
        raise ConfigError("stats needs --data or --config")
    summary = dataset.to_dict()
    summary.update({"K": dataset.K, "M": dataset.M, "balanced": dataset.balanced})
    _emit(render_report(summary), args.out)
    return EXIT_OK


def cmd_burnin(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    result = BurninEngine(config).run_burnin()
    _emit(render_report(result.report), args.out or config.output)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    spec = config.sweep or SweepSpec()
    updates: Dict[str, Any] = {}
    if args.vary:
        updates["vary"] = SweepParameter(args.vary)
    if args.start is not None or args.stop is not None:
        updates.update({"values": None, "start": args.start, "stop": args.stop})
    if args.points is not None:
        updates["points"] = args.points
    try:
        spec = SweepSpec.model_validate({**spec.model_dump(), **updates})
        values = spec.to_values()
    except (ValidationError, ValueError) as exc:
        raise ConfigError(f"invalid sweep: {exc}") from exc
    frame = BurninEngine(config).run_sweep(spec.vary, values)
    text = write_sweep_csv(frame, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    trace = BurninEngine(config).run_simulate(args.iterations)
    if args.out is None:
        sys.stdout.write(trace.to_dataframe().to_csv(index=False, float_format="%.17g"))
    else:
        write_trace_csv(trace, args.out)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    engine = BurninEngine(config)
    results = engine.run_validate(args.suite)
    _emit(render_report(engine.validate_report(results)), args.out)
    failed = any(r.status is SuiteStatus.FAILED for r in results)
    return EXIT_CERTIFICATE_FAILURE if failed else EXIT_OK


# ============================================================================
# ENTRY POINT
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="burnin", description="Burn-in bounds for random effects Gibbs samplers")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    stats = sub.add_parser("stats", help="summarize a raw data file")
    stats.add_argument("--data")
    stats.add_argument("--config")
    stats.add_argument("--out")
    stats.set_defaults(func=cmd_stats)

    burnin = sub.add_parser("burnin", help="derive certificates and find n*")
    burnin.add_argument("--config", required=True)
    burnin.add_argument("--data")
    burnin.add_argument("--seed", type=int)
    burnin.add_argument("--out")
    burnin.set_defaults(func=cmd_burnin)

    sweep = sub.add_parser("sweep", help="n* across a hyperparameter sweep")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--data")
    sweep.add_argument("--vary", choices=[p.value for p in SweepParameter])
    sweep.add_argument("--from", dest="start", type=float)
    sweep.add_argument("--to", dest="stop", type=float)
    sweep.add_argument("--points", type=int)
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep)

    simulate = sub.add_parser("simulate", help="run a chain and write its trace")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--data")
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--iterations", type=int)
    simulate.add_argument("--out")
    simulate.set_defaults(func=cmd_simulate)

    validate = sub.add_parser("validate", help="run the numerical property suites")
    validate.add_argument("--config", required=True)
    validate.add_argument("--data")
    validate.add_argument("--seed", type=int)
    validate.add_argument("--suite", choices=sorted(SUITES))
    validate.add_argument("--out")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s | %(levelname)-8s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc.message}\n")
        return EXIT_IO_ERROR
    except BurninError as exc:
        sys.stderr.write(f"error: {exc.message}\n")
        return EXIT_CERTIFICATE_FAILURE
    except (OSError, pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
