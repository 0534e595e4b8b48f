"""``python -m qtsp.service``: run the HTTP service with uvicorn."""

from __future__ import annotations

import argparse
import dataclasses
import logging
from pathlib import Path

import uvicorn

from .app import create_app
from .settings import ServiceSettings


def main(argv: list[str] | None = None) -> None:
    base = ServiceSettings.from_env()
    parser = argparse.ArgumentParser(prog="qtsp-serve", description="Serve the hybrid TSP microservice.")
    parser.add_argument("--host", default=base.host)
    parser.add_argument("--port", type=int, default=base.port)
    parser.add_argument("--scenario", type=Path, default=base.scenario_path, help="scenario override file")
    parser.add_argument("--poll-timeout", type=float, default=base.poll_timeout, help="virtual seconds")
    parser.add_argument("--clock-scale", type=float, default=base.clock_scale)
    parser.add_argument("--seed", type=int, default=base.seed)
    args = parser.parse_args(argv)

    settings = dataclasses.replace(
        base,
        host=args.host,
        port=args.port,
        scenario_path=args.scenario,
        poll_timeout=args.poll_timeout,
        clock_scale=args.clock_scale,
        seed=args.seed,
    )
    logging.basicConfig(level=logging.INFO)
    uvicorn.run(create_app(settings), host=settings.host, port=settings.port)


if __name__ == "__main__":
    main()
