"""Command-line entry point: ``validate``, ``run`` and ``list-scenarios``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .engine import DurationError, parse_duration
from .scenario import ParseError, ValidationError, builtin_names, load_builtin, resolve_scenario
from .simulation import run_scenario
from .telemetry import IoFailure

EXIT_OK, EXIT_UNRESOLVED, EXIT_CONFIG = 0, 1, 2
OUT_ENV = "RESILISIM_OUT"


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _duration(text: str) -> int:
    try:
        return parse_duration(text)
    except DurationError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resilisim", description="Contract-monitored resilience simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("scenario", help="scenario file or built-in name")

    r = sub.add_parser("run", help="simulate one or more scenarios")
    r.add_argument("scenarios", nargs="+", help="scenario files or built-in names")
    r.add_argument("--trace", help="trace output (JSON lines)")
    r.add_argument("--metrics", help="metrics output (CSV)")
    r.add_argument("--seed", type=_u64, help="override the scenario seed")
    r.add_argument("--until", type=_duration, help="override the run horizon, e.g. 20s")
    r.add_argument("--jobs", type=int, default=1, help="run independent scenarios in parallel")

    sub.add_parser("list-scenarios", help="list the built-in scenarios")
    return p


def _run_one(job: tuple[str, str, str, int | None, int | None]) -> tuple[int, str]:
    ref, trace, metrics, seed, until = job
    try:
        cfg = resolve_scenario(ref)
        result = run_scenario(cfg, trace, metrics, seed=seed, until=until)
    except (ParseError, ValidationError) as e:
        return EXIT_CONFIG, f"{ref}: {e}"
    except IoFailure as e:
        return EXIT_CONFIG, f"{ref}: {e}"
    return result.exit_code, result.summary() + f"\ntrace {trace}\nmetrics {metrics}"


def _cmd_run(args: argparse.Namespace) -> int:
    many = len(args.scenarios) > 1
    if many and (args.trace or args.metrics):
        print("--trace/--metrics name a single file; with several scenarios outputs go to $" + OUT_ENV, file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(os.environ.get(OUT_ENV, "."))
    jobs = []
    for ref in args.scenarios:
        stem = Path(ref).stem
        jobs.append((
            ref,
            args.trace or str(out / f"{stem}.trace.jsonl"),
            args.metrics or str(out / f"{stem}.metrics.csv"),
            args.seed,
            args.until,
        ))
    if args.jobs > 1 and many:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    code = EXIT_OK
    for rc, text in results:
        print(text, file=sys.stderr if rc == EXIT_CONFIG else sys.stdout)
        code = max(code, rc)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name in builtin_names():
            print(f"{name}\t{load_builtin(name).description}")
        return EXIT_OK
    if args.command == "validate":
        try:
            cfg = resolve_scenario(args.scenario)
        except ParseError as e:
            print(f"parse error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        except ValidationError as e:
            for path, msg in e.problems:
                print(f"{path}: {msg}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"ok: {cfg.name} ({len(cfg.components)} components, {len(cfg.faults)} faults)")
        return EXIT_OK
    return _cmd_run(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
