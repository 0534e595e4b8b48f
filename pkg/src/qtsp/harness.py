"""Batch evaluation driver: replay a device x shots plan against the service
and tabulate outcomes, resources, latency and cost."""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Any, Protocol

import yaml

from .errors import ConfigError
from .graph import brute_force_optimum, parse_matrix, tours_equivalent
from .qpe import DEFAULT_PHASE_BITS, qubit_requirement

ENDPOINTS = ("adiabatic", "gate")
DEFAULT_SHOTS = 1000


class HttpClient(Protocol):
    def post(self, url: str, **kwargs: Any) -> Any: ...


@dataclass(frozen=True)
class Triple:
    endpoint: str
    device: str
    shots: int | None = None
    phase_bits: int | None = None

    def __post_init__(self) -> None:
        if self.endpoint not in ENDPOINTS:
            raise ConfigError(f"unknown endpoint {self.endpoint!r}")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots must be positive")


@dataclass(frozen=True)
class ExperimentPlan:
    instance: Path
    triples: tuple[Triple, ...]
    repetitions: int = 1
    seed: int = 0
    output: Path | None = None

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")


def bundled_plan_path() -> Path:
    return Path(str(resources.files("qtsp.data").joinpath("paper_plan.yaml")))


def load_plan(path: str | Path) -> ExperimentPlan:
    path = Path(path)
    doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    try:
        instance = Path(doc["instance"])
        entries = doc["triples"]
    except (KeyError, TypeError):
        raise ConfigError(f"{path}: plan needs 'instance' and 'triples'") from None
    if not instance.is_absolute():
        instance = path.parent / instance
    try:
        triples = tuple(Triple(**t) for t in entries or [])
    except TypeError as exc:
        raise ConfigError(f"{path}: bad triple: {exc}") from None
    output = doc.get("output")
    return ExperimentPlan(
        instance=instance,
        triples=triples,
        repetitions=int(doc.get("repetitions", 1)),
        seed=int(doc.get("seed", 0)),
        output=Path(output) if output else None,
    )


@dataclass
class ExperimentRecord:
    triple: Triple
    cities: int
    repetitions: int
    routes: list[list[int]] = field(default_factory=list)
    distances: list[float | None] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    elapsed: list[float] = field(default_factory=list)
    total_cost: Decimal = Decimal("0")
    optimal: bool | None = None
    symmetric: bool = True

    @property
    def consistent(self) -> bool | None:
        """All successful routes are the same cycle; undefined below two successes."""
        if len(self.routes) < 2:
            return None
        first = self.routes[0]
        return all(tours_equivalent(first, r, self.symmetric) for r in self.routes[1:])

    @property
    def pattern(self) -> str:
        if not self.routes:
            if self.errors and all(e == "poll_timeout" for e in self.errors):
                return "timeout"
            return "error"
        if self.errors:
            return "partial"
        if self.consistent is False:
            return "inconsistent"
        return "consistent-optimal" if self.optimal else "consistent-suboptimal"

    def latency(self) -> tuple[float, float, float] | None:
        if not self.elapsed:
            return None
        return statistics.fmean(self.elapsed), min(self.elapsed), max(self.elapsed)

    def to_doc(self) -> dict[str, Any]:
        doc = asdict(self)
        doc["total_cost"] = str(self.total_cost)
        doc["consistent"] = self.consistent
        doc["pattern"] = self.pattern
        return doc


def run_plan(plan: ExperimentPlan, client: HttpClient) -> list[ExperimentRecord]:
    """Execute every triple ``repetitions`` times, in plan order.

    Shot-less triples are submitted once with the default shot count. HTTP
    error responses are recorded; transport failures propagate.
    """
    text = Path(plan.instance).read_text(encoding="utf-8")
    matrix = parse_matrix(text)
    best = brute_force_optimum(matrix)[0] if matrix.n <= 10 else None
    records: list[ExperimentRecord] = []
    for triple in plan.triples:
        reps = plan.repetitions if triple.shots is not None else 1
        rec = ExperimentRecord(triple, matrix.n, reps, symmetric=matrix.symmetric)
        params: dict[str, Any] = {"device": triple.device, "shots": triple.shots or DEFAULT_SHOTS}
        if triple.endpoint == "gate" and triple.phase_bits is not None:
            params["phase_bits"] = triple.phase_bits
        for _ in range(reps):
            resp = client.post(
                f"/tsp/{triple.endpoint}",
                params=params,
                files={"matrix": (Path(plan.instance).name, text.encode("utf-8"), "text/plain")},
            )
            body = resp.json()
            if resp.status_code == 200:
                rec.routes.append(list(body["route"]))
                rec.distances.append(body.get("distance"))
                rec.elapsed.append(float(body["elapsed"]))
                rec.total_cost += Decimal(str(body["cost_estimate"]))
            else:
                rec.errors.append(str(body.get("code", resp.status_code)))
        if rec.routes and best is not None:
            rec.optimal = all(tours_equivalent(best, r, matrix.symmetric) for r in rec.routes)
        records.append(rec)
    return records


@dataclass
class Table:
    title: str
    header: list[str]
    rows: list[list[str]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = [f"### {self.title}", "", "| " + " | ".join(self.header) + " |"]
        lines.append("|" + "|".join("---" for _ in self.header) + "|")
        lines += ["| " + " | ".join(r) + " |" for r in self.rows]
        return "\n".join(lines) + "\n"


@dataclass
class Report:
    results: Table
    resources: Table
    latency: Table
    cost: Table

    def tables(self) -> dict[str, Table]:
        return {"results": self.results, "resources": self.resources, "latency": self.latency, "cost": self.cost}

    def to_markdown(self) -> str:
        return "\n".join(t.to_markdown() for t in self.tables().values())


def _route_str(route: list[int]) -> str:
    return "[" + ",".join(str(c) for c in route) + "]"


def _result_cell(rec: ExperimentRecord) -> str:
    if not rec.routes:
        kind = "Timeout" if rec.pattern == "timeout" else "Error"
        return f"{kind} ({', '.join(sorted(set(rec.errors)))})"
    distinct: list[list[int]] = []
    for r in rec.routes:
        if not any(tours_equivalent(d, r, rec.symmetric) for d in distinct):
            distinct.append(r)
    label = {True: " (Consistent)", False: " (Inconsistent)", None: ""}[rec.consistent]
    cell = ", ".join(_route_str(r) for r in distinct) + label
    if rec.errors:
        cell += f"; errors: {', '.join(sorted(set(rec.errors)))}"
    return cell


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def render_report(records: list[ExperimentRecord]) -> Report:
    results = Table(
        "Results",
        ["architecture", "endpoint", "shots", "result", "pattern", "optimal"],
    )
    for rec in records:
        t = rec.triple
        results.rows.append(
            [
                t.device,
                t.endpoint,
                str(t.shots) if t.shots is not None else "---",
                _result_cell(rec),
                rec.pattern,
                "" if rec.optimal is None else str(rec.optimal).lower(),
            ]
        )

    res = Table("Resources", ["version", "cities", "qubits", "classical_bits"])
    seen: set[tuple] = set()
    for rec in records:
        n = rec.cities
        if rec.triple.endpoint == "gate":
            pb = rec.triple.phase_bits or DEFAULT_PHASE_BITS
            key = ("gate", n, pb)
            row = ["Gate-based TSP", str(n), str(qubit_requirement(n, pb)), str(pb)]
        else:
            key = ("annealing", n)
            row = ["Annealing TSP (logical variables)", str(n), str(n * n), str(n * n)]
        if key not in seen:
            seen.add(key)
            res.rows.append(row)

    latency = Table("Latency (virtual seconds)", ["architecture", "runs", "mean", "min", "max"])
    by_device: dict[str, list[float]] = {}
    for rec in records:
        if rec.elapsed:
            by_device.setdefault(rec.triple.device, []).extend(rec.elapsed)
    for device, vals in by_device.items():
        latency.rows.append(
            [device, str(len(vals)), _fmt(statistics.fmean(vals)), _fmt(min(vals)), _fmt(max(vals))]
        )

    cost = Table("Cost", ["architecture", "endpoint", "shots", "successful_runs", "total_cost"])
    for rec in records:
        t = rec.triple
        cost.rows.append(
            [
                t.device,
                t.endpoint,
                str(t.shots) if t.shots is not None else "---",
                str(len(rec.routes)),
                str(rec.total_cost),
            ]
        )
    return Report(results, res, latency, cost)


def write_report(report: Report, records: list[ExperimentRecord], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, table in report.tables().items():
        (out / f"{name}.csv").write_text(table.to_csv(), encoding="utf-8")
    (out / "report.md").write_text(report.to_markdown(), encoding="utf-8")
    (out / "records.json").write_text(
        json.dumps([r.to_doc() for r in records], indent=2, default=str), encoding="utf-8"
    )
    return out
