"""Quality pressure: per-cell elitism, k-nearest-neighbor local
competition, and the feasible/infeasible two-population machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Individual
from .partition import BoundarySet, CellIndex, GridSpec, cell_of

__all__ = [
    "cell_compete",
    "local_competition_score",
    "local_competition_scores",
    "infeasible_objective",
    "TwoPopulations",
    "route_offspring",
    "FeatureMap",
    "CellPopulations",
    "PopulationMap",
    "project_elites",
]


def cell_compete(
    incumbent: Optional[Individual], challenger: Individual
) -> Individual:
    """Strict-improvement elitism: the challenger takes the cell only
    with strictly higher fitness. Ties keep the incumbent, so a cell
    never churns without progress."""
    if incumbent is None or challenger.fitness > incumbent.fitness:
        return challenger
    return incumbent


def local_competition_score(
    subject_fitness: float, neighbor_fitnesses: Sequence[float]
) -> int:
    """Count how many of the given neighbors the subject strictly beats."""
    return int(sum(1 for f in neighbor_fitnesses if f < subject_fitness))


def local_competition_scores(
    subject_fitnesses: np.ndarray,
    distances: np.ndarray,
    reference_fitnesses: np.ndarray,
    k: int,
    subjects_in_references: bool = True,
) -> np.ndarray:
    """Local competition over precomputed distances.

    For each subject, its k nearest references (one self-match removed
    when the subjects belong to the reference set) are compared against
    the subject's fitness; the score is the count it strictly beats.
    """
    sub_fit = np.asarray(subject_fitnesses, dtype=np.float64)
    ref_fit = np.asarray(reference_fitnesses, dtype=np.float64)
    out = np.zeros(sub_fit.size, dtype=np.int64)
    for i in range(sub_fit.size):
        order = np.argsort(distances[i], kind="stable")
        if subjects_in_references:
            zero = np.flatnonzero(distances[i][order] == 0.0)
            if zero.size:
                order = np.delete(order, zero[0])
        nearest = order[: min(k, order.size)]
        out[i] = np.count_nonzero(ref_fit[nearest] < sub_fit[i])
    return out


def infeasible_objective(individual: Individual) -> float:
    """Objective of the infeasible population: drive infeasibility down.

    Returned negated so every population maximizes its objective. Calling
    this on a feasible individual is a contract violation.
    """
    if individual.evaluation.feasible:
        raise ValueError("infeasible objective is undefined for a feasible individual")
    return -individual.evaluation.infeasibility


@dataclass
class TwoPopulations:
    """Bounded feasible and infeasible pools evolving side by side."""

    feasible: list[Individual] = field(default_factory=list)
    infeasible: list[Individual] = field(default_factory=list)
    feasible_capacity: int = 100
    infeasible_capacity: int = 100


def route_offspring(
    child: Individual,
    pops: TwoPopulations,
    feasible_objective: Callable[[Individual], float],
    infeasible_objective_fn: Callable[[Individual], float] = infeasible_objective,
) -> str:
    """Place a child in the population matching its feasibility flag,
    regardless of where its parents lived.

    A full population admits the child and then evicts its worst member
    under that population's objective (which may be the child itself).
    Returns "feasible" or "infeasible".
    """
    if child.evaluation.feasible:
        pool, cap, obj = pops.feasible, pops.feasible_capacity, feasible_objective
        label = "feasible"
    else:
        pool, cap, obj = pops.infeasible, pops.infeasible_capacity, infeasible_objective_fn
        label = "infeasible"
    pool.append(child)
    if len(pool) > cap:
        worst = min(range(len(pool)), key=lambda i: obj(pool[i]))
        del pool[worst]
    return label


class FeatureMap:
    """Partitioned behavior space holding one elite per cell."""

    def __init__(self, spec: GridSpec, boundaries: Optional[BoundarySet] = None):
        self.spec = spec
        self.boundaries = boundaries
        self.cells: dict[CellIndex, Individual] = {}
        self.placements = 0
        self.replacements = 0
        self.rejections = 0

    def cell_of(self, descriptor: np.ndarray) -> CellIndex:
        return cell_of(descriptor, self.spec, self.boundaries)

    def place(self, individual: Individual) -> tuple[CellIndex, bool]:
        """Compete the individual into its cell. Returns (cell, accepted)."""
        cell = self.cell_of(individual.evaluation.descriptor)
        incumbent = self.cells.get(cell)
        winner = cell_compete(incumbent, individual)
        if winner is individual:
            self.cells[cell] = individual
            self.placements += 1
            if incumbent is not None:
                self.replacements += 1
            return cell, True
        self.rejections += 1
        return cell, False

    def rebin(self, boundaries: BoundarySet) -> int:
        """Re-place every elite under new sliding boundaries.

        Elites whose new cells collide re-compete; losers are dropped.
        Returns the number of elites lost to collisions.
        """
        self.boundaries = boundaries
        old = list(self.cells.values())
        self.cells = {}
        lost = 0
        for ind in old:
            cell = self.cell_of(ind.evaluation.descriptor)
            incumbent = self.cells.get(cell)
            winner = cell_compete(incumbent, ind)
            if winner is ind:
                self.cells[cell] = ind
                if incumbent is not None:
                    lost += 1
            else:
                lost += 1
        return lost

    @property
    def coverage(self) -> float:
        return len(self.cells) / self.spec.total_cells

    @property
    def qd_score(self) -> float:
        return float(sum(ind.fitness for ind in self.cells.values()))

    @property
    def best_fitness(self) -> float:
        if not self.cells:
            return 0.0
        return max(ind.fitness for ind in self.cells.values())

    def elites(self) -> list[Individual]:
        return [self.cells[c] for c in sorted(self.cells)]


@dataclass
class CellPopulations:
    """Dual bounded populations living inside one map cell."""

    feasible: list[Individual] = field(default_factory=list)
    infeasible: list[Individual] = field(default_factory=list)

    def best_feasible(self) -> Optional[Individual]:
        if not self.feasible:
            return None
        return max(self.feasible, key=lambda ind: ind.fitness)


class PopulationMap:
    """Grid of ``CellPopulations`` used by the constrained map engine.

    Feasible members compete on fitness, infeasible members on closeness
    to feasibility; each side is truncated to the cell capacity.
    """

    def __init__(self, spec: GridSpec, capacity: int):
        if capacity < 1:
            raise ValueError("cell capacity must be at least 1")
        self.spec = spec
        self.capacity = capacity
        self.cells: dict[CellIndex, CellPopulations] = {}

    def cell_of(self, descriptor: np.ndarray) -> CellIndex:
        return cell_of(descriptor, self.spec)

    def place(self, individual: Individual) -> CellIndex:
        cell = self.cell_of(individual.evaluation.descriptor)
        pops = self.cells.setdefault(cell, CellPopulations())
        if individual.evaluation.feasible:
            pool = pops.feasible
            pool.append(individual)
            if len(pool) > self.capacity:
                # ties evict the newest arrival, mirroring cell_compete
                worst = min(
                    range(len(pool)), key=lambda i: (pool[i].fitness, -i)
                )
                del pool[worst]
        else:
            pool = pops.infeasible
            pool.append(individual)
            if len(pool) > self.capacity:
                worst = max(
                    range(len(pool)),
                    key=lambda i: (pool[i].evaluation.infeasibility, i),
                )
                del pool[worst]
        return cell

    def elite_view(self) -> dict[CellIndex, Individual]:
        """Best feasible member per cell; cells holding only infeasible
        members do not count as covered."""
        out = {}
        for cell, pops in self.cells.items():
            best = pops.best_feasible()
            if best is not None:
                out[cell] = best
        return out

    def nonempty_pools(self) -> list[tuple[CellIndex, str]]:
        pools = []
        for cell in sorted(self.cells):
            if self.cells[cell].feasible:
                pools.append((cell, "feasible"))
            if self.cells[cell].infeasible:
                pools.append((cell, "infeasible"))
        return pools


def project_elites(
    individuals: Sequence[Individual], spec: GridSpec
) -> dict[CellIndex, Individual]:
    """Compete a set of individuals onto a reference grid.

    Used to report population-based runs on the same footing as map-based
    ones; the projection never feeds back into the search.
    """
    cells: dict[CellIndex, Individual] = {}
    for ind in individuals:
        cell = cell_of(ind.evaluation.descriptor, spec)
        cells[cell] = cell_compete(cells.get(cell), ind)
    return cells
