from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ServiceSettings:
    """Runtime configuration. Environment variables use the ``QTSP_`` prefix."""

    host: str = "127.0.0.1"
    port: int = 8000
    scenario_path: Path | None = None
    poll_timeout: float = 300.0
    clock_scale: float | None = None  # None: take it from the scenario
    seed: int | None = None  # None: take it from the scenario

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "ServiceSettings":
        env = dict(os.environ if env is None else env)
        kwargs: dict = {}
        if "QTSP_HOST" in env:
            kwargs["host"] = env["QTSP_HOST"]
        if "QTSP_PORT" in env:
            kwargs["port"] = int(env["QTSP_PORT"])
        if env.get("QTSP_SCENARIO"):
            kwargs["scenario_path"] = Path(env["QTSP_SCENARIO"])
        if "QTSP_POLL_TIMEOUT" in env:
            kwargs["poll_timeout"] = float(env["QTSP_POLL_TIMEOUT"])
        if "QTSP_CLOCK_SCALE" in env:
            kwargs["clock_scale"] = float(env["QTSP_CLOCK_SCALE"])
        if "QTSP_SEED" in env:
            kwargs["seed"] = int(env["QTSP_SEED"])
        return cls(**kwargs)
