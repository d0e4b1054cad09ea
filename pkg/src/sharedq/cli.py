"""Command-line entry point: run an experiment spec end to end.

Exit codes: 0 all runs succeeded, 1 configuration error (nothing
written), 2 at least one run failed (bundle still written).
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import parse_spec, spec_to_ini
from .errors import ConfigError
from .outputs import OutputBundle, run_row
from .sim import plan_sweep, run_entries

WORKERS_ENV = "SHAREDQ_WORKERS"


def _resolve_workers(flag_value: int | None, spec_value: int) -> int:
    if flag_value is not None:
        return max(1, flag_value)
    if os.environ.get(WORKERS_ENV):
        try:
            return max(1, int(os.environ[WORKERS_ENV]))
        except ValueError as exc:
            raise ConfigError(
                f"{WORKERS_ENV} must be an integer, got "
                f"{os.environ[WORKERS_ENV]!r}"
            ) from exc
    if spec_value > 0:
        return spec_value
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharedq",
        description="Run a networked-dilemma shared-DQN experiment spec.",
    )
    parser.add_argument("spec", help="path to an INI experiment spec")
    parser.add_argument("--out", help="output directory (overrides the spec)")
    parser.add_argument(
        "--workers", type=int, default=None,
        help=f"parallel run processes (default: spec, then ${WORKERS_ENV}, "
             "then cpu count)",
    )
    parser.add_argument(
        "--dump-trace", action="store_true",
        help="write trace-<runid>.csv for every run",
    )
    parser.add_argument(
        "--dump-activations", action="store_true",
        help="write activations-<runid>.csv for every run",
    )
    parser.add_argument(
        "--resume-skip-existing", action="store_true",
        help="skip runs whose run_id is already present in runs.csv",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = parse_spec(args.spec)
        workers = _resolve_workers(args.workers, spec.workers)
        entries = plan_sweep(
            spec.base, spec.axes, list(spec.seeds), spec.base_seed
        )
    except ConfigError as exc:
        print(f"sharedq: spec error: {exc}", file=sys.stderr)
        return 1

    out_dir = args.out if args.out else spec.out_dir
    dump_trace = spec.dump_trace or args.dump_trace
    dump_activations = spec.dump_activations or args.dump_activations

    bundle = OutputBundle(out_dir)
    spec_text = spec_to_ini(spec)
    statuses: dict[str, dict] = {}

    todo = entries
    if args.resume_skip_existing:
        done_ids = bundle.existing_run_ids()
        todo = [e for e in entries if e.run_id not in done_ids]
        for e in entries:
            if e.run_id in done_ids:
                statuses[e.run_id] = {"status": "skipped_existing"}
    bundle.write_manifest(spec_text, entries, statuses)

    total = len(todo)
    completed = 0
    failures = 0

    def on_row(row) -> None:
        nonlocal completed, failures
        completed += 1
        if row.error is not None:
            failures += 1
            statuses[row.entry.run_id] = {"status": "failed", "error": row.error}
            print(
                f"sharedq: run {row.entry.run_id} failed: {row.error}",
                file=sys.stderr,
            )
        else:
            statuses[row.entry.run_id] = {"status": "ok"}
            bundle.append_run(row.entry, row.result)
            if dump_trace:
                bundle.write_trace(row.entry, row.result)
            if dump_activations:
                bundle.write_activations(row.entry, row.result)
        print(f"sharedq: {completed}/{total} runs completed", file=sys.stderr)

    run_entries(todo, workers=workers, on_row=on_row)
    bundle.write_manifest(spec_text, entries, statuses)

    if os.path.exists(bundle.runs_path):
        rows = [r for r in bundle.read_runs()]
        bundle.write_thresholds(rows, spec.threshold_criterion)

    return 2 if failures else 0


def cli_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    cli_main()
