"""Command line entry point.

    qtsp harness run --plan paper --out results/
    qtsp serve --port 8000
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import httpx

from . import harness
from .errors import ConfigError

log = logging.getLogger("qtsp")


def _client(base_url: str | None, seed: int):
    if base_url:
        return httpx.Client(base_url=base_url, timeout=None)
    from fastapi.testclient import TestClient

    from .service import ServiceSettings, create_app

    return TestClient(create_app(ServiceSettings(seed=seed)))


def _harness_run(args: argparse.Namespace) -> int:
    path = harness.bundled_plan_path() if args.plan == "paper" else Path(args.plan)
    try:
        plan = harness.load_plan(path)
    except (OSError, ConfigError) as exc:
        print(f"error: cannot load plan: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    if args.base_url and args.seed is not None:
        log.warning("--seed only seeds the in-process service; the remote one keeps its own")
    out = args.out or plan.output
    if out is None:
        print("error: no output directory (use --out)", file=sys.stderr)
        return 2

    try:
        with _client(args.base_url, plan.seed) as client:
            records = harness.run_plan(plan, client)
    except httpx.TransportError as exc:
        print(f"error: service unreachable: {exc}", file=sys.stderr)
        return 1
    report = harness.render_report(records)
    harness.write_report(report, records, out)
    print(report.results.to_markdown())
    print(f"wrote {len(records)} rows to {out}")
    return 0


def _serve(args: argparse.Namespace) -> int:
    from .service.__main__ import main as serve_main

    serve_main(args.serve_args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtsp", description="Hybrid quantum TSP service tools")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("harness", help="batch experiments")
    hsub = h.add_subparsers(dest="action", required=True)
    run = hsub.add_parser("run", help="execute a plan and write the report tables")
    run.add_argument("--plan", required=True, help="plan YAML file, or 'paper' for the bundled plan")
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--seed", type=int, help="seed for the in-process service")
    run.add_argument("--base-url", help="talk to a running service instead of an in-process one")
    run.set_defaults(func=_harness_run)

    s = sub.add_parser("serve", help="run the HTTP service (options as qtsp-serve)", add_help=False)
    s.add_argument("serve_args", nargs=argparse.REMAINDER)
    s.set_defaults(func=_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


def harness_main(argv: list[str] | None = None) -> int:
    """``harness run ...``: the harness subcommand as its own executable."""
    return main(["harness", *(sys.argv[1:] if argv is None else argv)])


if __name__ == "__main__":
    sys.exit(main())
