"""Experiment matrix orchestration, scoring and report tables.

Each cell is (system, model, experiment, example system).  A cell runs its
``k`` generations, parses every answer leniently, renders the parsed graph
back to canonical prose and scores it against the ground truth.  Finished
cells are cached under ``<out>/cells`` by digest so an interrupted matrix
resumes where it stopped.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .dataset import DEFAULT_EXAMPLE, Dataset, DatasetIncomplete, load_dataset
from .gateway import Gateway, GenerationRecord, ModelSpec, TranscriptStore, request_digest
from .metrics import TEXT_METRICS, aggregate, score_text
from .prompts import EXPERIMENTS, ExperimentConfig, experiment, prompts_for
from .prose import ProseError, parse_prose, render_prose

log = logging.getLogger(__name__)

LOOCV = "loocv"
METRIC_NAMES = [m.value for m in TEXT_METRICS]


@dataclass
class RunMatrix:
    systems: list[str]
    models: list[ModelSpec]
    experiments: list[ExperimentConfig]
    k: int = 5
    example_system: str = DEFAULT_EXAMPLE
    # Systems used for the no-knowledge baseline; defaults to ``systems``.
    baseline_systems: list[str] | None = None
    parallelism: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def loocv(self) -> bool:
        return self.example_system == LOOCV

    @classmethod
    def from_dict(cls, data: dict) -> "RunMatrix":
        return cls(
            systems=list(data["systems"]),
            models=[ModelSpec.from_dict(m) for m in data["models"]],
            experiments=[experiment(e) for e in data.get("experiments", list(EXPERIMENTS))],
            k=int(data.get("k", 5)),
            example_system=data.get("example_system", DEFAULT_EXAMPLE),
            baseline_systems=data.get("baseline_systems"),
            parallelism=int(data.get("parallelism", 2)),
        )

    @classmethod
    def load(cls, path) -> "RunMatrix":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def cells(self) -> list[tuple[str, ModelSpec, ExperimentConfig, str | None]]:
        """Every (system, model, experiment, example) cell in report order."""
        out = []
        for config in self.experiments:
            if self.loocv:
                if not config.use_example:
                    continue
                for system in self.systems:
                    for model in self.models:
                        for example in self.systems:
                            out.append((system, model, config, example))
                continue
            systems = self.systems
            if config.is_baseline and self.baseline_systems is not None:
                systems = self.baseline_systems
            for system in systems:
                for model in self.models:
                    out.append((system, model, config, self.example_system if config.use_example else None))
        return out


@dataclass
class RunResult:
    run_index: int
    scores: dict[str, float]
    error: str | None = None
    parsed: bool = True
    anomalies: int = 0


@dataclass
class CellResult:
    system: str
    model: str
    experiment: str
    example_system: str | None
    runs: list[RunResult] = field(default_factory=list)
    median: dict[str, float] = field(default_factory=dict)
    stddev: dict[str, float] = field(default_factory=dict)
    null: bool = False
    transcript: str | None = None

    @property
    def column(self) -> str:
        return self.example_system if self.experiment.endswith("@loocv") else self.experiment

    def recompute(self) -> tuple[dict[str, float], dict[str, float]]:
        medians, stddevs = {}, {}
        for name in METRIC_NAMES:
            agg = aggregate([r.scores[name] for r in self.runs])
            medians[name], stddevs[name] = agg.median, agg.stddev
        return medians, stddevs

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CellResult":
        data = dict(data)
        data["runs"] = [RunResult(**r) for r in data.get("runs", [])]
        return cls(**data)


@dataclass
class EvaluationReport:
    mode: str
    cells: list[CellResult] = field(default_factory=list)
    partial: bool = False

    def to_dict(self) -> dict:
        return {"mode": self.mode, "partial": self.partial, "cells": [c.to_dict() for c in self.cells]}

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        return cls(data["mode"], [CellResult.from_dict(c) for c in data["cells"]], data.get("partial", False))

    def __eq__(self, other):
        if not isinstance(other, EvaluationReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def verify(self, tol: float = 1e-12) -> bool:
        """Stored medians agree with medians recomputed from per-run values."""
        for cell in self.cells:
            if cell.null:
                continue
            medians, _ = cell.recompute()
            if any(abs(medians[m] - cell.median[m]) > tol for m in METRIC_NAMES):
                return False
        return True

    def columns(self) -> list[str]:
        seen: list[str] = []
        for cell in self.cells:
            if cell.column not in seen:
                seen.append(cell.column)
        return seen

    def table(self, metric: str) -> tuple[list[str], list[tuple[str, str, dict]]]:
        """(columns, rows); each row is (system, model, {column: (median, stddev) or None}).

        A ``None`` value is a Null cell; columns a row never ran are absent.
        """
        columns = self.columns()
        rows: dict[tuple[str, str], dict] = {}
        for cell in self.cells:
            row = rows.setdefault((cell.system, cell.model), {})
            row[cell.column] = None if cell.null else (cell.median[metric], cell.stddev[metric])
        return columns, [(s, m, values) for (s, m), values in rows.items()]


# -- scoring ------------------------------------------------------------------------


def score_record(record: GenerationRecord, reference: str) -> tuple[RunResult, str]:
    """Score one generation; failed generations score 0 on every metric."""
    if not record.ok:
        return RunResult(record.run_index, {m: 0.0 for m in METRIC_NAMES}, record.error, False), ""
    parsed, anomalies = True, 0
    try:
        graph, found = parse_prose(record.raw_text, mode="lenient")
        candidate = render_prose(graph, strict=False)
        anomalies = len(found)
    except ProseError:
        parsed = False
        candidate = record.raw_text
    values = score_text(candidate, reference)
    scores = {m.value: values[m].value for m in TEXT_METRICS}
    return RunResult(record.run_index, scores, None, parsed, anomalies), candidate


def _cell_label(config: ExperimentConfig, example: str | None, loocv: bool) -> str:
    return f"{config.id}-example-{example}" if loocv else config.id


def _digest(*parts) -> str:
    return hashlib.sha256(json.dumps(parts, sort_keys=True).encode("utf-8")).hexdigest()[:24]


# -- orchestration -----------------------------------------------------------------------


def run_matrix(
    matrix: RunMatrix,
    dataset: Dataset | str | Path | None,
    gateway: Gateway,
    out_dir,
    cell_limit: int | None = None,
) -> EvaluationReport:
    """Run every cell of ``matrix``; cached cells are reused.

    ``cell_limit`` stops after that many newly computed cells and returns a
    partial report (used to exercise resumption).
    """
    if not isinstance(dataset, Dataset):
        dataset = load_dataset(dataset)
    needed = set(matrix.systems) | set(matrix.baseline_systems or [])
    if not matrix.loocv:
        needed.add(matrix.example_system)
    missing = [s for s in sorted(needed) if s not in dataset.systems]
    if missing:
        raise DatasetIncomplete([f"{s}/" for s in missing])

    out = Path(out_dir)
    cache = out / "cells"
    cache.mkdir(parents=True, exist_ok=True)
    store = TranscriptStore(out / "runs")
    gateway.store = store
    references = {name: render_prose(dataset[name].groundtruth) for name in needed}

    report = EvaluationReport(LOOCV if matrix.loocv else "fixed")
    computed = 0
    for system, model, config, example in matrix.cells():
        experiment_id = f"{config.id}@loocv" if matrix.loocv else config.id
        if matrix.loocv and example == system:
            report.cells.append(CellResult(system, model.model_name, experiment_id, example, null=True))
            continue
        bundle = prompts_for(config, dataset, system, example)
        key = _digest(request_digest(bundle, model), system, example, matrix.k, references[system])
        cached = cache / f"{key}.json"
        if cached.is_file():
            report.cells.append(CellResult.from_dict(json.loads(cached.read_text(encoding="utf-8"))))
            continue
        if cell_limit is not None and computed >= cell_limit:
            report.partial = True
            break

        label = _cell_label(config, example, matrix.loocv)
        store.reset(label, system, model.slug)
        records = gateway.generate(bundle, model, matrix.k, label=label)
        cell = CellResult(
            system,
            model.model_name,
            experiment_id,
            example,
            transcript=str(store.path(label, system, model.slug).relative_to(out)),
        )
        parsed_dir = out / "parsed" / label / system / model.slug
        parsed_dir.mkdir(parents=True, exist_ok=True)
        for record in records:
            result, candidate = score_record(record, references[system])
            cell.runs.append(result)
            (parsed_dir / f"run{record.run_index}.gsnt").write_text(candidate, encoding="utf-8")
        cell.median, cell.stddev = cell.recompute()
        cached.write_text(json.dumps(cell.to_dict(), sort_keys=True, indent=1), encoding="utf-8")
        report.cells.append(cell)
        computed += 1
        log.info("%s %s %s: %s", system, model.model_name, label, cell.median)
    return report


# -- report emission ----------------------------------------------------------------------


def _row_max(values: dict):
    present = [v[0] for v in values.values() if v is not None]
    return max(present) if present else None


def _cells(values: dict, columns: list[str]) -> list[tuple[str, str, bool]]:
    """(median, stddev, is_row_max) strings per column."""
    best = _row_max(values)
    out = []
    for c in columns:
        if c not in values:
            out.append(("", "", False))
        elif values[c] is None:
            out.append(("Null", "", False))
        else:
            med, sd = values[c]
            out.append((f"{med:.4f}", f"{sd:.4f}", med == best))
    return out


def render_table(report: EvaluationReport, metric: str, fmt: str) -> str:
    """One metric table; the row maximum is starred (csv) or bold (markdown)."""
    columns, rows = report.table(metric)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["system", "model", *[h for c in columns for h in (c, f"{c}_sd")]])
        for system, model, values in rows:
            flat = []
            for med, sd, best in _cells(values, columns):
                flat += [med + ("*" if best else ""), sd]
            writer.writerow([system, model, *flat])
        return buf.getvalue()
    lines = [
        f"### Median {metric} (σ)" + (" [partial]" if report.partial else ""),
        "",
        "| System | Model | " + " | ".join(columns) + " |",
        "|---|---|" + "---|" * len(columns),
    ]
    for system, model, values in rows:
        shown = []
        for med, sd, best in _cells(values, columns):
            text = med if not sd else f"{med} ({sd})"
            shown.append(f"**{text}**" if best else text)
        lines.append(f"| {system} | {model} | " + " | ".join(shown) + " |")
    return "\n".join(lines) + "\n"


def emit_report(report: EvaluationReport, fmt: str, out_dir) -> list[Path]:
    """Write the report as ``csv`` (one file per metric), ``markdown`` or ``json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out / "report.json"
        path.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
        return [path]
    if fmt == "csv":
        paths = []
        for metric in METRIC_NAMES:
            path = out / f"report_{metric}.csv"
            path.write_text(render_table(report, metric, "csv"), encoding="utf-8")
            paths.append(path)
        return paths
    if fmt == "markdown":
        path = out / "report.md"
        path.write_text("\n".join(render_table(report, m, "markdown") for m in METRIC_NAMES), encoding="utf-8")
        return [path]
    raise ValueError(f"unknown report format {fmt!r}")


def load_report(path) -> EvaluationReport:
    return EvaluationReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


__all__ = [
    "CellResult",
    "EvaluationReport",
    "LOOCV",
    "METRIC_NAMES",
    "RunMatrix",
    "RunResult",
    "emit_report",
    "load_report",
    "render_table",
    "run_matrix",
    "score_record",
]
