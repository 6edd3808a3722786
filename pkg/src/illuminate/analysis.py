"""Expressivity reporting and lineage explainability.

Reports are computed from a projected elite-per-cell view: map engines
expose their own grid, distance-based engines are projected onto a
reference grid for reporting only. Lineage queries walk the run's
append-only individual history.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import Individual

__all__ = [
    "CellRecord",
    "ExpressivityReport",
    "LineageNode",
    "snapshot",
    "heatmap_export",
    "lineage_trace",
    "common_ancestors",
]


@dataclass(frozen=True)
class CellRecord:
    """One nonempty cell: its index and the elite occupying it."""

    cell: tuple[int, ...]
    fitness: float
    individual_id: int


@dataclass(frozen=True)
class ExpressivityReport:
    generation: int
    evaluations: int
    resolution: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...]
    descriptor_names: tuple[str, ...]
    coverage: float
    qd_score: float
    best_fitness: float
    cells: tuple[CellRecord, ...]
    # histograms[d][k] = number of elites whose cell index along
    # dimension d equals k
    histograms: tuple[tuple[int, ...], ...]

    @property
    def total_cells(self) -> int:
        return math.prod(self.resolution)

    @property
    def filled_cells(self) -> int:
        return len(self.cells)

    def to_dict(self) -> dict:
        return {
            "generation": self.generation,
            "evaluations": self.evaluations,
            "resolution": list(self.resolution),
            "bounds": [list(b) for b in self.bounds],
            "descriptor_names": list(self.descriptor_names),
            "coverage": self.coverage,
            "qd_score": self.qd_score,
            "best_fitness": self.best_fitness,
            "total_cells": self.total_cells,
            "filled_cells": self.filled_cells,
            "cells": [
                {
                    "cell": list(rec.cell),
                    "fitness": rec.fitness,
                    "individual_id": rec.individual_id,
                }
                for rec in self.cells
            ],
            "histograms": [list(h) for h in self.histograms],
        }


def snapshot(engine) -> ExpressivityReport:
    """Expressivity report for the engine's current archive.

    Read-only: works on the engine's copied cell view and never touches
    run state, so it can be called at any iteration boundary.
    """
    spec, cells = engine.projected_view()
    records = tuple(
        CellRecord(cell=cell, fitness=ind.fitness, individual_id=ind.id)
        for cell, ind in sorted(cells.items())
    )
    counts = [[0] * r for r in spec.resolution]
    for rec in records:
        for d, k in enumerate(rec.cell):
            counts[d][k] += 1
    return ExpressivityReport(
        generation=engine.generation,
        evaluations=engine.evaluations,
        resolution=spec.resolution,
        bounds=spec.bounds,
        descriptor_names=tuple(engine.domain.descriptor_names),
        coverage=len(records) / spec.total_cells,
        qd_score=float(sum(rec.fitness for rec in records)),
        best_fitness=float(max((rec.fitness for rec in records), default=0.0)),
        cells=records,
        histograms=tuple(tuple(c) for c in counts),
    )


def heatmap_export(report: ExpressivityReport, axes: tuple[int, int]) -> np.ndarray:
    """Best-fitness matrix over two chosen descriptor dimensions.

    Other dimensions are marginalized by max. Empty cells are NaN.
    """
    a, b = axes
    n = len(report.resolution)
    if n < 2:
        raise ValueError("heatmap needs at least two descriptor dimensions")
    for ax in (a, b):
        if not 0 <= ax < n:
            raise ValueError(f"axis {ax} out of range for {n} descriptor dimensions")
    if a == b:
        raise ValueError("heatmap axes must be distinct")
    grid = np.full((report.resolution[a], report.resolution[b]), np.nan)
    for rec in report.cells:
        i, j = rec.cell[a], rec.cell[b]
        if np.isnan(grid[i, j]) or rec.fitness > grid[i, j]:
            grid[i, j] = rec.fitness
    return grid


@dataclass(frozen=True)
class LineageNode:
    individual_id: int
    generation: int
    operation: str  # "seed" | "mutation" | "crossover"
    fitness: float
    parents: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "individual_id": self.individual_id,
            "generation": self.generation,
            "operation": self.operation,
            "fitness": self.fitness,
            "parents": list(self.parents),
        }


def _node(ind: Individual) -> LineageNode:
    return LineageNode(
        individual_id=ind.id,
        generation=ind.birth_generation,
        operation=ind.variation,
        fitness=ind.fitness,
        parents=tuple(ind.parents),
    )


def lineage_trace(
    individual_id: int, history: Mapping[int, Individual]
) -> dict[int, LineageNode]:
    """Full ancestor closure of one individual, keyed by id.

    Each node carries the variation operation that produced it, so the
    edges to its parents are annotated. Raises on ids the run never
    produced.
    """
    if individual_id not in history:
        raise ValueError(f"unknown individual id: {individual_id}")
    closure: dict[int, LineageNode] = {}
    frontier = [individual_id]
    while frontier:
        iid = frontier.pop()
        if iid in closure:
            continue
        ind = history[iid]
        closure[iid] = _node(ind)
        frontier.extend(p for p in ind.parents if p not in closure)
    return closure


def common_ancestors(
    ids: Iterable[int], history: Mapping[int, Individual]
) -> tuple[int, ...]:
    """Ids present in every given individual's ancestor closure.

    Each individual counts as its own ancestor, so querying a single id
    returns its whole closure. Result is sorted for determinism.
    """
    id_list = list(ids)
    if not id_list:
        raise ValueError("need at least one individual id")
    shared: set[int] | None = None
    for iid in id_list:
        closure = set(lineage_trace(iid, history))
        shared = closure if shared is None else shared & closure
    return tuple(sorted(shared))
