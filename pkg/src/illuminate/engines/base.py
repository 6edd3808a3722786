"""Uniform engine shell: configuration, budget accounting, metrics,
lineage history and the step contract shared by every algorithm.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from ..core import (
    DomainSpec,
    EngineError,
    Evaluation,
    Individual,
    child_genome,
    evaluate_batch,
    rng_stream,
)
from ..partition import CellIndex, GridSpec
from ..quality import project_elites

__all__ = ["EngineConfig", "Engine"]


@dataclass
class EngineConfig:
    """Parameters shared by all engines; each engine reads its slice.

    ``grid_kind``/``grid_resolution`` exist only for map-based engines;
    ``population_size`` only for population-based ones. The registry's
    ``validate_engine_config`` enforces the pairing rules.
    """

    algorithm: str
    budget: int
    init_count: int = 100
    batch_size: int = 32
    population_size: int = 100
    crossover_rate: float = 0.5
    grid_kind: Optional[str] = None
    grid_resolution: Optional[tuple[int, ...]] = None
    novelty_k: int = 15
    novelty_threshold: Optional[float] = None
    novelty_floor: float = 1e-6
    surprise_centroids: int = 10
    sliding_interval: int = 100
    lc_neighbors: int = 15
    cell_capacity: int = 10
    target_coverage: Optional[float] = None
    reference_resolution: int = 20
    infeasible_in_archive: bool = False

    def __post_init__(self):
        if self.grid_resolution is not None:
            self.grid_resolution = tuple(int(r) for r in self.grid_resolution)

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, tuple):
                value = list(value)
            out[key] = value
        return out


class Engine:
    """Base run controller.

    Subclasses implement ``_initialize_population`` and ``_iterate``;
    everything else (budget exactness, metrics records, history for
    lineage queries, the step contract) lives here.
    """

    algorithm = "?"
    uses_grid = False
    supports_preferences = False

    def __init__(self, domain: DomainSpec, config: EngineConfig, seed: int):
        self.domain = domain
        self.config = config
        self.seed = int(seed)
        self.rng_init = rng_stream(self.seed, "init")
        self.rng_select = rng_stream(self.seed, "selection")
        self.rng_vary = rng_stream(self.seed, "variation")
        self.rng_aux = rng_stream(self.seed, "auxiliary")
        self.generation = 0
        self.evaluations = 0
        self.initialized = False
        self.history: dict[int, Individual] = {}
        self.metrics: list[dict[str, Any]] = []
        self.best_fitness = 0.0
        self.init_failures = 0
        self._next_id = 0

    # bookkeeping ----------------------------------------------------

    def _register(
        self,
        genome: Any,
        evaluation: Evaluation,
        parents: tuple[int, ...],
        generation: int,
    ) -> Individual:
        ind = Individual(
            id=self._next_id,
            genome=genome,
            evaluation=evaluation,
            parents=parents,
            birth_generation=generation,
        )
        self._next_id += 1
        self.history[ind.id] = ind
        if evaluation.feasible and evaluation.fitness > self.best_fitness:
            self.best_fitness = evaluation.fitness
        return ind

    @property
    def remaining_budget(self) -> int:
        return max(0, self.config.budget - self.evaluations)

    @property
    def finished(self) -> bool:
        if self.remaining_budget == 0:
            return True
        if self.config.target_coverage is not None and self.initialized:
            return self.coverage() >= self.config.target_coverage
        return False

    # stepping -------------------------------------------------------

    def _seed_count(self) -> int:
        """How many random genomes initialization draws."""
        return self.config.init_count

    def initialize(self):
        if self.initialized:
            return
        count = min(self._seed_count(), self.config.budget)
        individuals = []
        for _ in range(count):
            genome = self.domain.random_genome(self.rng_init)
            self.evaluations += 1
            try:
                evaluation = self.domain.evaluate(genome)
            except Exception:
                self.init_failures += 1
                continue
            individuals.append(self._register(genome, evaluation, (), 0))
        self._initialize_population(individuals)
        if not self._has_individuals():
            raise EngineError(
                f"no individuals archived after initialization: "
                f"{self.init_failures} of {count} evaluations failed"
            )
        self.initialized = True

    def step(self, iterations: int = 1):
        """Advance the run by up to ``iterations`` iterations (stopping
        early when the budget or coverage target is hit). Initialization
        happens on the first advancing step and is not an iteration."""
        if iterations < 0:
            raise ValueError("cannot step a negative number of iterations")
        for _ in range(iterations):
            if not self.initialized:
                self.initialize()
            if self.finished:
                break
            self._iterate(self.remaining_budget)
            self.generation += 1
            self._record_metrics()
        return self.generation

    def run(self, callback: Optional[Callable[["Engine"], None]] = None):
        """Run to completion. ``callback`` fires after every iteration."""
        if not self.initialized:
            self.initialize()
        while not self.finished:
            self._iterate(self.remaining_budget)
            self.generation += 1
            self._record_metrics()
            if callback is not None:
                callback(self)
        return self

    def _record_metrics(self):
        record = {
            "generation": self.generation,
            "evaluations": self.evaluations,
            "coverage": self.coverage(),
            "qd_score": self.qd_score(),
            "best_fitness": self.best_fitness,
            "archive_sizes": self.archive_sizes(),
        }
        record.update(self._metric_extras())
        self.metrics.append(record)

    def _metric_extras(self) -> dict[str, Any]:
        return {}

    # reporting ------------------------------------------------------

    def reference_spec(self) -> GridSpec:
        res = (self.config.reference_resolution,) * self.domain.descriptor_dims
        return GridSpec.uniform(self.domain.descriptor_bounds, res)

    def map_view(self) -> Optional[tuple[GridSpec, dict[CellIndex, Individual]]]:
        """Grid spec + elite-per-cell view for map engines, None otherwise."""
        return None

    def projected_view(self) -> tuple[GridSpec, dict[CellIndex, Individual]]:
        view = self.map_view()
        if view is not None:
            return view
        spec = self.reference_spec()
        return spec, project_elites(self.report_elites(), spec)

    def coverage(self) -> float:
        spec, cells = self.projected_view()
        return len(cells) / spec.total_cells

    def qd_score(self) -> float:
        _, cells = self.projected_view()
        return float(sum(ind.fitness for ind in cells.values()))

    # subclass surface -----------------------------------------------

    def _initialize_population(self, individuals: list[Individual]):
        raise NotImplementedError

    def _has_individuals(self) -> bool:
        raise NotImplementedError

    def _iterate(self, max_evaluations: int):
        raise NotImplementedError

    def report_elites(self) -> list[Individual]:
        """The individuals this engine presents as its output corpus."""
        raise NotImplementedError

    def archive_sizes(self) -> dict[str, int]:
        raise NotImplementedError

    # variation helper shared by all engines -------------------------

    def _spawn_batch(
        self,
        pairs: Sequence[tuple[Individual, Optional[Individual]]],
        generation: int,
    ) -> list[Individual]:
        genomes = []
        parent_ids = []
        for a, b in pairs:
            genomes.append(child_genome(self.domain, a, b, self.rng_vary))
            parent_ids.append((a.id,) if b is None else (a.id, b.id))
        evaluations = evaluate_batch(self.domain, genomes)
        self.evaluations += len(genomes)
        return [
            self._register(g, ev, pid, generation)
            for g, ev, pid in zip(genomes, evaluations, parent_ids)
        ]
