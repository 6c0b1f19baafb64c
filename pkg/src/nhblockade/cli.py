"""Command-line front end: ``nhblockade <command> --config run.json``.

Exit codes: 0 success, 2 config error, 3 more than 5% of grid points failed,
4 no point satisfies the requested condition.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings

from .analytics import ConditionSolution
from .exceptions import ConditionNotFoundError
from .experiments import (
    FAILURE_THRESHOLD,
    ConfigError,
    SweepResult,
    default_workers,
    load_config,
    run_conditions,
    run_distribution,
    run_eps,
    run_heatmap,
    run_sweep,
    run_validate_full,
    to_csv,
    to_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_NOT_FOUND = 4

COMMANDS = ("sweep", "heatmap", "eps", "conditions", "validate-full", "distribution")

log = logging.getLogger("nhblockade")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhblockade",
        description="Photon blockade in a two-mode resonator with nonreciprocal coupling.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", help="output file (default: output.path from the config, else stdout)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format (overrides config)")
    parser.add_argument("--workers", type=int, help="worker processes (default: $NHBLOCKADE_WORKERS)")
    parser.add_argument("--kind", choices=("cpb", "cpb-non-ep", "upb"), default="cpb",
                        help="condition for the 'conditions' command")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set model.U=3 (value parsed as JSON)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _conditions_csv(sol: ConditionSolution) -> str:
    lines = ["mu_over_pi,delta,label"]
    for (mu, delta), label in zip(sol.points(), sol.labels or [""] * len(sol)):
        d = "" if delta is None else f"{delta:.17g}"
        lines.append(f"{mu / math.pi:.17g},{d},{label}")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, _overrides(args.set))
        env_workers = default_workers()
        workers = args.workers or env_workers or cfg.workers
        if workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {workers}")
        fmt = args.format or cfg.output["format"]
        out = args.out or cfg.output.get("path")

        if args.command in ("eps", "conditions"):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                try:
                    sol = run_eps(cfg) if args.command == "eps" else run_conditions(cfg, args.kind)
                except ConditionNotFoundError as exc:
                    print(f"no condition found: {exc}", file=sys.stderr)
                    return EXIT_NOT_FOUND
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
            # conditions are JSON unless csv is asked for on the command line
            _emit(_conditions_csv(sol) if args.format == "csv" else to_json(sol), out)
            if sol.empty:
                print("no condition found: " + json.dumps(sol.as_dict()["diagnostics"]), file=sys.stderr)
                return EXIT_NOT_FOUND
            return EXIT_OK

        if args.command == "sweep":
            if not cfg.axes:
                raise ConfigError("sweep needs a 'sweep' section")
            result = run_sweep(cfg, workers)
        elif args.command == "heatmap":
            result = run_heatmap(cfg, workers)
        elif args.command == "validate-full":
            if not cfg.axes:
                raise ConfigError("validate-full needs a 'sweep' section")
            result = run_validate_full(cfg, workers)
        else:
            try:
                result = run_distribution(cfg)
            except (RuntimeError, ArithmeticError) as exc:
                print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
                return EXIT_SOLVER
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    _emit(to_csv(result) if fmt == "csv" else to_json(result), out)
    return _exit_for(result)


def _exit_for(result: SweepResult) -> int:
    failed = result.metadata.get("failed_rows", 0)
    if failed:
        print(f"{failed}/{len(result.rows)} grid points failed", file=sys.stderr)
        for r in result.rows:
            if not r["converged"]:
                log.info("failed row %s", r.get("error"))
    if result.failure_fraction > FAILURE_THRESHOLD:
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
