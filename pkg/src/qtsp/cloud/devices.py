"""Device profiles and scenario documents."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from ..errors import ConfigError

PAPER_DEVICES = (
    "local",
    "sv1",
    "tn1",
    "ionq",
    "riggeti_aspen8",
    "riggeti_aspen9",
    "dwave_dw2000",
    "dwave_advantage",
)
PARADIGMS = ("annealing", "gate", "gate-simulator")


@dataclass(frozen=True)
class QueueDelay:
    """Time a task waits in the vendor queue before it may start."""

    kind: str = "fixed"
    low: float = 0.0
    high: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "uniform", "unbounded"):
            raise ConfigError(f"unknown queue delay kind {self.kind!r}")
        if self.low < 0 or self.high < self.low:
            raise ConfigError(f"invalid delay bounds [{self.low}, {self.high}]")

    @classmethod
    def fixed(cls, seconds: float) -> "QueueDelay":
        return cls("fixed", seconds, seconds)

    @classmethod
    def uniform(cls, low: float, high: float) -> "QueueDelay":
        return cls("uniform", low, high)

    @classmethod
    def unbounded(cls) -> "QueueDelay":
        return cls("unbounded")

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "unbounded":
            return math.inf
        if self.kind == "fixed":
            return self.low
        return float(rng.uniform(self.low, self.high))

    def to_doc(self) -> dict[str, Any]:
        if self.kind == "fixed":
            return {"kind": "fixed", "seconds": self.low}
        if self.kind == "uniform":
            return {"kind": "uniform", "low": self.low, "high": self.high}
        return {"kind": "unbounded"}

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "QueueDelay":
        kind = doc.get("kind")
        try:
            if kind == "fixed":
                return cls.fixed(float(doc["seconds"]))
            if kind == "uniform":
                return cls.uniform(float(doc["low"]), float(doc["high"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad queue_delay {dict(doc)!r}: {exc}") from None
        if kind == "unbounded":
            return cls.unbounded()
        raise ConfigError(f"unknown queue delay kind {kind!r}")


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    paradigm: str
    qubit_capacity: int | None = None  # None = unbounded
    available: bool = True
    queue_delay: QueueDelay = field(default_factory=QueueDelay)
    per_task_fee: Decimal = Decimal("0")
    per_shot_fee: Decimal = Decimal("0")
    readout_flip: float = 0.0
    bypass_queue: bool = False
    execution_seconds: float = 0.0
    anneal_sweeps: int = 1000

    def __post_init__(self) -> None:
        if self.paradigm not in PARADIGMS:
            raise ConfigError(f"{self.name}: unknown paradigm {self.paradigm!r}")
        if self.qubit_capacity is not None and self.qubit_capacity < 1:
            raise ConfigError(f"{self.name}: qubit_capacity must be positive")
        object.__setattr__(self, "per_task_fee", _decimal(self.per_task_fee, self.name))
        object.__setattr__(self, "per_shot_fee", _decimal(self.per_shot_fee, self.name))
        if self.per_task_fee < 0 or self.per_shot_fee < 0:
            raise ConfigError(f"{self.name}: fees must be non-negative")
        if not 0.0 <= self.readout_flip <= 0.5:
            raise ConfigError(f"{self.name}: readout_flip must lie in [0, 0.5]")
        if self.execution_seconds < 0:
            raise ConfigError(f"{self.name}: execution_seconds must be non-negative")
        if self.anneal_sweeps < 1:
            raise ConfigError(f"{self.name}: anneal_sweeps must be positive")

    @property
    def is_gate(self) -> bool:
        return self.paradigm in ("gate", "gate-simulator")

    def fits(self, requirement: int) -> bool:
        return self.qubit_capacity is None or requirement <= self.qubit_capacity

    def to_doc(self) -> dict[str, Any]:
        doc = dataclasses.asdict(self)
        doc["queue_delay"] = self.queue_delay.to_doc()
        doc["per_task_fee"] = str(self.per_task_fee)
        doc["per_shot_fee"] = str(self.per_shot_fee)
        return doc


def _decimal(value: Any, name: str) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        value = repr(value)
    try:
        return Decimal(str(value))
    except InvalidOperation:
        raise ConfigError(f"{name}: fee {value!r} is not a decimal number") from None


_PROFILE_FIELDS = {f.name for f in dataclasses.fields(DeviceProfile)}


def _profile_from_doc(doc: Mapping[str, Any], base: DeviceProfile | None) -> DeviceProfile:
    unknown = set(doc) - _PROFILE_FIELDS
    if unknown:
        raise ConfigError(f"unknown device fields {sorted(unknown)}")
    values = dict(doc)
    if "queue_delay" in values and not isinstance(values["queue_delay"], QueueDelay):
        values["queue_delay"] = QueueDelay.from_doc(values["queue_delay"])
    try:
        if base is None:
            return DeviceProfile(**values)
        return dataclasses.replace(base, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class Scenario:
    devices: dict[str, DeviceProfile]
    seed: int = 0
    clock_scale: float = 0.0
    name: str = "custom"


def _read_document(source: str | Path | Mapping[str, Any] | None) -> dict[str, Any]:
    if source is None:
        return {}
    if isinstance(source, Mapping):
        return dict(source)
    text = Path(source).read_text(encoding="utf-8")
    doc = yaml.safe_load(text) or {}
    if not isinstance(doc, dict):
        raise ConfigError("scenario document must be a mapping")
    return doc


def bundled_scenario_document() -> dict[str, Any]:
    text = resources.files("qtsp.data").joinpath("paper_scenario.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def _devices_from(entries: Any, base: dict[str, DeviceProfile] | None) -> dict[str, DeviceProfile]:
    if not isinstance(entries, list):
        raise ConfigError("'devices' must be a list")
    out = dict(base or {})
    seen: set[str] = set()
    for entry in entries:
        if not isinstance(entry, Mapping) or "name" not in entry:
            raise ConfigError(f"device entry without a name: {entry!r}")
        name = entry["name"]
        if name in seen:
            raise ConfigError(f"device {name!r} listed more than once")
        seen.add(name)
        if name not in PAPER_DEVICES:
            raise ConfigError(f"unknown device {name!r}; expected one of {', '.join(PAPER_DEVICES)}")
        out[name] = _profile_from_doc(entry, out.get(name))
    return out


def load_scenario(source: str | Path | Mapping[str, Any] | None = None) -> Scenario:
    """Bundled paper scenario with the overrides in ``source`` applied.

    ``source`` may be a path to a YAML/JSON document, an already parsed
    mapping, or ``None`` for the defaults. Device entries are matched by name
    and only the fields they mention change.
    """
    bundled = bundled_scenario_document()
    devices = _devices_from(bundled["devices"], None)
    override = _read_document(source)
    unknown = set(override) - {"name", "seed", "clock_scale", "devices"}
    if unknown:
        raise ConfigError(f"unknown scenario keys {sorted(unknown)}")
    if "devices" in override:
        devices = _devices_from(override["devices"], devices)
    try:
        seed = int(override.get("seed", bundled.get("seed", 0)))
        scale = float(override.get("clock_scale", bundled.get("clock_scale", 0.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if scale < 0:
        raise ConfigError("clock_scale must be non-negative")
    name = str(override.get("name", bundled.get("name", "paper-scenario")))
    ordered = {k: devices[k] for k in PAPER_DEVICES}
    return Scenario(ordered, seed=seed, clock_scale=scale, name=name)
