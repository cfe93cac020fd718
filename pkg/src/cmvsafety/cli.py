"""Operator command line.

Subcommands: ingest (parse + build report), serve (HTTP API), assess
(before/during/after table), synth (generate a synthetic bundle), and
report detours (route table for one site).

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import date
from pathlib import Path

from .assessment import run_assessment, serialize_assessment_csv, spec_from_doc
from .detours import serialize_route_table_csv
from .errors import CmvSafetyError
from .ingest import write_bundle
from .snapshot import ServiceConfig, SnapshotHolder, build_snapshot
from .synthetic import SyntheticConfig, generate_synthetic

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _load_json(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CmvSafetyError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise CmvSafetyError(f"{path}: expected a JSON object")
    return raw


def _snapshot_for(data_dir: str, strict: bool):
    return build_snapshot(
        ServiceConfig(data_dir=data_dir, strict_ingest=strict)
    )


def cmd_ingest(args: argparse.Namespace) -> int:
    snap = _snapshot_for(args.data_dir, args.strict)
    report = dataclasses.asdict(snap.report)
    report["build_id"] = snap.build_id
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    config = ServiceConfig.from_file(args.config)
    holder = SnapshotHolder(build_snapshot(config))
    app = create_app(holder)
    print(f"serving build {holder.get().build_id} on {config.host}:{config.port}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return EXIT_OK


def cmd_assess(args: argparse.Namespace) -> int:
    spec = spec_from_doc(_load_json(args.spec))
    snap = _snapshot_for(args.data, args.strict)
    rows = run_assessment(spec, snap.analytics)
    if args.json:
        print(json.dumps([dataclasses.asdict(r) for r in rows], default=str))
    else:
        sys.stdout.write(serialize_assessment_csv(rows))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    overrides = _load_json(args.config) if args.config else {}
    if "start_date" in overrides:
        overrides["start_date"] = date.fromisoformat(str(overrides["start_date"]))
    try:
        config = SyntheticConfig(**overrides)
    except TypeError as exc:
        raise CmvSafetyError(str(exc)) from exc
    bundle = generate_synthetic(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_bundle(bundle, out)
    print(
        f"wrote {len(bundle.segments)} segments, {len(bundle.probe)} probe rows, "
        f"{len(bundle.trajectories)} trips to {out}"
    )
    return EXIT_OK


def cmd_report_detours(args: argparse.Namespace) -> int:
    snap = _snapshot_for(args.data, args.strict)
    if args.site not in snap.sites:
        raise CmvSafetyError(f"unknown site {args.site!r}")
    sys.stdout.write(serialize_route_table_csv(snap.route_tables[args.site]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmvsafety",
        description="Safety enforcement analytics for commercial vehicle corridors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse a data directory and report counts")
    p_ingest.add_argument("data_dir")
    p_ingest.add_argument("--strict", action="store_true",
                          help="abort on the first malformed row")
    p_ingest.set_defaults(func=cmd_ingest)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--config", required=True, help="service config JSON")
    p_serve.set_defaults(func=cmd_serve)

    p_assess = sub.add_parser("assess", help="before/during/after assessment table")
    p_assess.add_argument("--spec", required=True, help="assessment spec JSON")
    p_assess.add_argument("--data", required=True, help="data directory")
    p_assess.add_argument("--strict", action="store_true")
    p_assess.add_argument("--json", action="store_true",
                          help="emit raw JSON rows instead of CSV")
    p_assess.set_defaults(func=cmd_assess)

    p_synth = sub.add_parser("synth", help="generate a synthetic data bundle")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--config", help="generator config JSON")
    p_synth.set_defaults(func=cmd_synth)

    p_report = sub.add_parser("report", help="printable reports")
    report_sub = p_report.add_subparsers(dest="report_kind", required=True)
    p_detours = report_sub.add_parser("detours", help="route table for one site")
    p_detours.add_argument("--site", required=True)
    p_detours.add_argument("--data", required=True, help="data directory")
    p_detours.add_argument("--strict", action="store_true")
    p_detours.set_defaults(func=cmd_report_detours)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold that into the validation code.
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _fail(f"not found: {exc.filename or exc}")
        return EXIT_IO
    except PermissionError as exc:
        _fail(f"permission denied: {exc.filename or exc}")
        return EXIT_IO
    except IsADirectoryError as exc:
        _fail(f"expected a file: {exc.filename or exc}")
        return EXIT_IO
    except OSError as exc:
        _fail(str(exc))
        return EXIT_IO
    except CmvSafetyError as exc:
        _fail(str(exc))
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
