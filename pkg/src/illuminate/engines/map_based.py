"""Map-based engines: grid archives with per-cell elitism.

All four share the same steady-state loop: select parent cells from the
archive, spawn a batch of offspring, evaluate, compete each offspring
into its cell. They differ in how cells are chosen (uniform, novelty
proportional) and in what a cell holds (one elite, dual populations).

Cell selection honors steering preference weights: a cell of weight w is
drawn with probability proportional to w (baseline 1).
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..core import Individual
from ..divergence import NoveltyArchive, novelty_scores
from ..partition import BoundarySet, CellIndex, GridSpec, recompute_boundaries
from ..quality import FeatureMap, PopulationMap
from .base import Engine, EngineConfig

__all__ = [
    "MapElites",
    "MapElitesNovelty",
    "SlidingBoundariesMapElites",
    "ConstrainedMapElites",
]


class _GridEngine(Engine):
    """Shared machinery for engines that archive into a grid."""

    uses_grid = True
    supports_preferences = True
    grid_kinds: tuple[str, ...] = ("uniform", "binary")

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.grid_spec = self._build_grid_spec()
        self.preferences: dict[CellIndex, float] = {}
        self.selection_counts: dict[CellIndex, int] = {}

    def _build_grid_spec(self) -> GridSpec:
        kind = self.config.grid_kind or self.grid_kinds[0]
        bounds = self.domain.descriptor_bounds
        if kind == "binary":
            return GridSpec.binary(self.domain.descriptor_dims)
        resolution = self.config.grid_resolution
        if resolution is None:
            resolution = (self.config.reference_resolution,) * len(bounds)
        if kind == "sliding":
            return GridSpec.sliding(bounds, resolution)
        return GridSpec.uniform(bounds, resolution)

    def set_preference(self, cell: CellIndex, weight: float):
        """Bias future parent selection toward a cell. Weight 1 resets.

        Weights may target empty cells; they stay inert until occupied.
        """
        cell = tuple(int(c) for c in cell)
        if len(cell) != self.grid_spec.dims:
            raise ValueError(
                f"cell has {len(cell)} indices, grid has {self.grid_spec.dims}"
            )
        for c, r in zip(cell, self.grid_spec.resolution):
            if not (0 <= c < r):
                raise ValueError(f"cell index {cell} outside grid resolution")
        if not np.isfinite(weight) or weight < 1.0:
            raise ValueError("preference weight must be a finite real >= 1")
        if weight == 1.0:
            self.preferences.pop(cell, None)
        else:
            self.preferences[cell] = float(weight)

    def _weighted_choice(self, cells: list[CellIndex]) -> CellIndex:
        weights = np.array(
            [self.preferences.get(c, 1.0) for c in cells], dtype=np.float64
        )
        idx = int(self.rng_select.choice(len(cells), p=weights / weights.sum()))
        cell = cells[idx]
        self.selection_counts[cell] = self.selection_counts.get(cell, 0) + 1
        return cell

    def selection_count_table(self) -> dict[str, int]:
        return {
            ",".join(map(str, cell)): n
            for cell, n in sorted(self.selection_counts.items())
        }


class MapElites(_GridEngine):
    """Uniform random elite selection over a single-elite grid."""

    algorithm = "ME"

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.map = FeatureMap(self.grid_spec)

    def _initialize_population(self, individuals: list[Individual]):
        for ind in individuals:
            self.map.place(ind)

    def _has_individuals(self) -> bool:
        return bool(self.map.cells)

    def select_parent_cell(self, cells: Optional[list[CellIndex]] = None) -> CellIndex:
        if cells is None:
            cells = sorted(self.map.cells)
        return self._weighted_choice(cells)

    def _parent_for(self, cell: CellIndex) -> Individual:
        return self.map.cells[cell]

    def _selection_cells(self) -> list[CellIndex]:
        return sorted(self.map.cells)

    def _iterate(self, max_evaluations: int):
        n = min(self.config.batch_size, max_evaluations)
        cells = self._selection_cells()
        pairs = []
        for _ in range(n):
            parent = self._parent_for(self.select_parent_cell(cells))
            mate = None
            if (
                len(cells) > 1
                and self.rng_vary.random() < self.config.crossover_rate
            ):
                mate = self._parent_for(self.select_parent_cell(cells))
            pairs.append((parent, mate))
        offspring = self._spawn_batch(pairs, self.generation + 1)
        for child in offspring:
            self.map.place(child)
        self._after_batch(offspring)

    def _after_batch(self, offspring: list[Individual]):
        pass

    def report_elites(self) -> list[Individual]:
        return self.map.elites()

    def map_view(self):
        return self.map.spec, dict(self.map.cells)

    def archive_sizes(self) -> dict[str, int]:
        return {"elites": len(self.map.cells)}


class MapElitesNovelty(MapElites):
    """Parent cells drawn proportionally to elite novelty.

    Novelty is scored against the current elites plus a novelty archive
    that receives every offspring unconditionally. A small floor keeps
    zero-novelty elites selectable.
    """

    algorithm = "ME-NOV"

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        threshold = config.novelty_threshold
        if threshold is None:
            threshold = domain.default_novelty_threshold()
        self.novelty_archive = NoveltyArchive(add_threshold=threshold)
        self._iteration_weights: Optional[dict[CellIndex, float]] = None

    def _novelty_weights(self, cells: list[CellIndex]) -> dict[CellIndex, float]:
        elites = [self.map.cells[c] for c in cells]
        if len(elites) == 1 and len(self.novelty_archive) == 0:
            return {cells[0]: 1.0}
        vectors = np.vstack([self.domain.distance_vector(e) for e in elites])
        refs = np.vstack(
            [vectors, self.novelty_archive.as_array(vectors.shape[1])]
        )
        scores = novelty_scores(
            vectors,
            refs,
            k=self.config.novelty_k,
            subjects_in_references=True,
            metric=self.domain.distance_metric,
        )
        floored = np.maximum(scores, self.config.novelty_floor)
        return dict(zip(cells, floored))

    def select_parent_cell(self, cells: Optional[list[CellIndex]] = None) -> CellIndex:
        if cells is None:
            cells = sorted(self.map.cells)
        if self._iteration_weights is not None and all(
            c in self._iteration_weights for c in cells
        ):
            novelty = self._iteration_weights
        else:
            novelty = self._novelty_weights(cells)
        weights = np.array(
            [novelty[c] * self.preferences.get(c, 1.0) for c in cells]
        )
        idx = int(self.rng_select.choice(len(cells), p=weights / weights.sum()))
        cell = cells[idx]
        self.selection_counts[cell] = self.selection_counts.get(cell, 0) + 1
        return cell

    def _iterate(self, max_evaluations: int):
        self._iteration_weights = self._novelty_weights(sorted(self.map.cells))
        try:
            super()._iterate(max_evaluations)
        finally:
            self._iteration_weights = None

    def _after_batch(self, offspring: list[Individual]):
        for child in offspring:
            self.novelty_archive.add(
                self.domain.distance_vector(child),
                fitness=child.fitness,
                individual_id=child.id,
            )

    def archive_sizes(self) -> dict[str, int]:
        return {
            "elites": len(self.map.cells),
            "novelty_archive": len(self.novelty_archive),
        }


class SlidingBoundariesMapElites(MapElites):
    """ME over percentile-fitted boundaries, refitted every λ evaluations.

    Every evaluated descriptor lands in a buffer; on refit the archive is
    re-binned under the new boundaries and collisions re-compete.
    """

    algorithm = "MESB"
    grid_kinds = ("sliding",)

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.descriptor_buffer: list[np.ndarray] = []
        self.boundary_epoch = 0
        self._since_refit = 0

    def _initialize_population(self, individuals: list[Individual]):
        self.descriptor_buffer.extend(
            ind.evaluation.descriptor for ind in individuals
        )
        self.map.boundaries = recompute_boundaries(
            np.vstack(self.descriptor_buffer), self.grid_spec
        )
        for ind in individuals:
            self.map.place(ind)

    def _after_batch(self, offspring: list[Individual]):
        self.descriptor_buffer.extend(
            child.evaluation.descriptor for child in offspring
        )
        self._since_refit += len(offspring)
        if self._since_refit >= self.config.sliding_interval:
            boundaries = recompute_boundaries(
                np.vstack(self.descriptor_buffer), self.grid_spec
            )
            self.map.rebin(boundaries)
            self.boundary_epoch += 1
            self._since_refit = 0

    def _metric_extras(self):
        return {"boundary_epoch": self.boundary_epoch}


class ConstrainedMapElites(_GridEngine):
    """Dual bounded populations per cell: feasible members compete on
    fitness, infeasible ones on closeness to feasibility.

    Parents come from a uniformly chosen nonempty cell-population (cell
    weights still apply), then uniformly within it.
    """

    algorithm = "CME"

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.map = PopulationMap(self.grid_spec, config.cell_capacity)

    def _initialize_population(self, individuals: list[Individual]):
        for ind in individuals:
            self.map.place(ind)

    def _has_individuals(self) -> bool:
        return bool(self.map.cells)

    def _parent_from_pool(self, pool: list[Individual]) -> Individual:
        if len(pool) == 1:
            return pool[0]
        return pool[int(self.rng_select.integers(len(pool)))]

    def select_parent_pool(
        self, pools: Optional[list[tuple[CellIndex, str]]] = None
    ) -> tuple[CellIndex, str]:
        if pools is None:
            pools = self.map.nonempty_pools()
        weights = np.array(
            [self.preferences.get(cell, 1.0) for cell, _ in pools]
        )
        idx = int(self.rng_select.choice(len(pools), p=weights / weights.sum()))
        cell, label = pools[idx]
        self.selection_counts[cell] = self.selection_counts.get(cell, 0) + 1
        return cell, label

    def _draw_parent(self, pools) -> Individual:
        cell, label = self.select_parent_pool(pools)
        pool = getattr(self.map.cells[cell], label)
        return self._parent_from_pool(pool)

    def _iterate(self, max_evaluations: int):
        n = min(self.config.batch_size, max_evaluations)
        pools = self.map.nonempty_pools()
        pairs = []
        for _ in range(n):
            parent = self._draw_parent(pools)
            mate = None
            if (
                len(pools) > 1
                and self.rng_vary.random() < self.config.crossover_rate
            ):
                mate = self._draw_parent(pools)
            pairs.append((parent, mate))
        for child in self._spawn_batch(pairs, self.generation + 1):
            self.map.place(child)

    def report_elites(self) -> list[Individual]:
        view = self.map.elite_view()
        return [view[c] for c in sorted(view)]

    def map_view(self):
        return self.map.spec, self.map.elite_view()

    def archive_sizes(self) -> dict[str, int]:
        feasible = sum(len(p.feasible) for p in self.map.cells.values())
        infeasible = sum(len(p.infeasible) for p in self.map.cells.values())
        return {
            "cells": len(self.map.cells),
            "feasible": feasible,
            "infeasible": infeasible,
        }
