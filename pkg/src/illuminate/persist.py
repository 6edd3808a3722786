"""Run artifact persistence: archive/metrics/lineage dumps and report files.

Every writer is byte-deterministic for a given run state: keys sorted,
compact separators, shortest round-trip float text, no timestamps. Two
invocations of the same seeded run must produce identical files.
"""
from __future__ import annotations

import json
import statistics
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .analysis import CellRecord, ExpressivityReport, heatmap_export

__all__ = [
    "SCHEMA_VERSION",
    "ARCHIVE_FILE",
    "METRICS_FILE",
    "LINEAGE_FILE",
    "REPORT_FILE",
    "CELLS_FILE",
    "HEATMAP_FILE",
    "HISTOGRAMS_FILE",
    "META_FILE",
    "STATUS_FILE",
    "COMPARISON_FILE",
    "json_line",
    "write_jsonl",
    "load_jsonl",
    "archive_records",
    "lineage_records",
    "write_archive",
    "write_metrics",
    "write_lineage",
    "write_report_files",
    "load_report",
    "write_meta",
    "write_status",
    "comparison_rows",
    "write_comparison",
]

SCHEMA_VERSION = 1

ARCHIVE_FILE = "archive.jsonl"
METRICS_FILE = "metrics.jsonl"
LINEAGE_FILE = "lineage.jsonl"
REPORT_FILE = "report.json"
CELLS_FILE = "cells.csv"
HEATMAP_FILE = "heatmap.csv"
HISTOGRAMS_FILE = "histograms.csv"
META_FILE = "run.json"
STATUS_FILE = "run_status.json"
COMPARISON_FILE = "comparison.csv"


def json_line(record: Mapping) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def write_jsonl(path: Path, records: Iterable[Mapping]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json_line(record))


def load_jsonl(path: Path) -> list[dict]:
    with Path(path).open("r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def archive_records(engine) -> list[dict]:
    """One record per reported elite, sorted by id.

    Genomes are stored in the domain's text form so every record reloads
    and re-evaluates exactly. ``cell`` is the elite's grid cell for map
    engines and null for distance-based ones.
    """
    view = engine.map_view()
    id_to_cell: dict[int, tuple[int, ...]] = {}
    if view is not None:
        _, cells = view
        id_to_cell = {ind.id: cell for cell, ind in cells.items()}
    records = []
    for ind in sorted(engine.report_elites(), key=lambda i: i.id):
        ev = ind.evaluation
        cell = id_to_cell.get(ind.id)
        records.append(
            {
                "id": ind.id,
                "genome": engine.domain.genome_to_text(ind.genome),
                "fitness": ev.fitness,
                "descriptor": [float(x) for x in ev.descriptor],
                "feasible": ev.feasible,
                "infeasibility": ev.infeasibility,
                "cell": list(cell) if cell is not None else None,
                "parents": list(ind.parents),
                "birth_generation": ind.birth_generation,
            }
        )
    return records


def lineage_records(engine) -> list[dict]:
    """Every individual the run ever produced, sorted by id."""
    return [
        {
            "id": ind.id,
            "parents": list(ind.parents),
            "generation": ind.birth_generation,
            "operation": ind.variation,
            "fitness": ind.fitness,
        }
        for ind in sorted(engine.history.values(), key=lambda i: i.id)
    ]


def write_archive(path: Path, engine) -> None:
    write_jsonl(path, archive_records(engine))


def write_metrics(path: Path, engine) -> None:
    write_jsonl(path, engine.metrics)


def write_lineage(path: Path, engine) -> None:
    write_jsonl(path, lineage_records(engine))


def _csv_value(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_value(v) for v in row) + "\n")


def write_report_files(
    out_dir: Path, report: ExpressivityReport, axes: tuple[int, int] = (0, 1)
) -> list[str]:
    """report.json plus the cells / heatmap / histograms tables.

    The heatmap CSV is a bare matrix with empty fields marking empty
    cells. Returns the artifact file names written.
    """
    out_dir = Path(out_dir)
    payload = {"schema_version": SCHEMA_VERSION, **report.to_dict()}
    with (out_dir / REPORT_FILE).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")

    dims = len(report.resolution)
    header = [f"cell_{d}" for d in range(dims)] + ["fitness", "individual_id"]
    _write_csv(
        out_dir / CELLS_FILE,
        header,
        ([*rec.cell, rec.fitness, rec.individual_id] for rec in report.cells),
    )

    grid = heatmap_export(report, axes)
    _write_csv(
        out_dir / HEATMAP_FILE,
        (),
        (["" if np.isnan(v) else float(v) for v in row] for row in grid),
    )

    _write_csv(
        out_dir / HISTOGRAMS_FILE,
        ("dimension", "bin", "count"),
        (
            (d, k, count)
            for d, hist in enumerate(report.histograms)
            for k, count in enumerate(hist)
        ),
    )
    return [REPORT_FILE, CELLS_FILE, HEATMAP_FILE, HISTOGRAMS_FILE]


def load_report(path: str | Path) -> ExpressivityReport:
    """Rebuild an ExpressivityReport from a persisted report.json."""
    with Path(path).open("r", encoding="utf-8") as fh:
        data = json.load(fh)
    return ExpressivityReport(
        generation=data["generation"],
        evaluations=data["evaluations"],
        resolution=tuple(data["resolution"]),
        bounds=tuple(tuple(b) for b in data["bounds"]),
        descriptor_names=tuple(data["descriptor_names"]),
        coverage=data["coverage"],
        qd_score=data["qd_score"],
        best_fitness=data["best_fitness"],
        cells=tuple(
            CellRecord(
                cell=tuple(c["cell"]),
                fitness=c["fitness"],
                individual_id=c["individual_id"],
            )
            for c in data["cells"]
        ),
        histograms=tuple(tuple(h) for h in data["histograms"]),
    )


def write_meta(out_dir: Path, config: Mapping) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **config}
    with (Path(out_dir) / META_FILE).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def write_status(
    out_dir: Path,
    status: str,
    error: str | None = None,
    artifacts: Sequence[str] | None = None,
) -> None:
    payload: dict = {"schema_version": SCHEMA_VERSION, "status": status}
    if error is not None:
        payload["error"] = error
    if artifacts is not None:
        payload["artifacts"] = sorted(artifacts)
    with (Path(out_dir) / STATUS_FILE).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def comparison_rows(results: Sequence[dict]) -> list[dict]:
    """Per-run rows plus a median row per algorithm.

    ``results`` entries carry algorithm, seed, coverage, qd_score,
    best_fitness. Median rows use "median" in the seed column.
    """
    rows = sorted(results, key=lambda r: (r["algorithm"], r["seed"]))
    by_algo: dict[str, list[dict]] = {}
    for row in rows:
        by_algo.setdefault(row["algorithm"], []).append(row)
    out = list(rows)
    for algo in sorted(by_algo):
        group = by_algo[algo]
        out.append(
            {
                "algorithm": algo,
                "seed": "median",
                "coverage": statistics.median(r["coverage"] for r in group),
                "qd_score": statistics.median(r["qd_score"] for r in group),
                "best_fitness": statistics.median(r["best_fitness"] for r in group),
            }
        )
    return out


def write_comparison(path: Path, results: Sequence[dict]) -> None:
    _write_csv(
        path,
        ("algorithm", "seed", "coverage", "qd_score", "best_fitness"),
        (
            [r["algorithm"], r["seed"], r["coverage"], r["qd_score"], r["best_fitness"]]
            for r in comparison_rows(results)
        ),
    )
