"""Population-based engines: constrained novelty search (two variants),
constrained surprise search, two divergence + local-competition
multi-objective searches, and an objective-only GA baseline.

All five are generational: each iteration spawns as many offspring as
the population holds (clipped to the remaining budget). Selection is by
binary tournament on the engine's score, except the Pareto engines,
which use non-dominated rank then crowding distance.

Within-generation scoring is a snapshot: pool members are scored at the
start of the iteration and arrivals against the pre-update pools and
archive, so eviction during routing compares values frozen at those two
points rather than rescoring after every placement.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..core import Individual
from ..divergence import (
    NoveltyArchive,
    SurpriseModel,
    archive_consider,
    novelty_scores,
    pairwise_distances,
    summarize_generation,
    surprise_predict,
    surprise_scores,
)
from ..quality import (
    TwoPopulations,
    infeasible_objective,
    local_competition_scores,
    route_offspring,
)
from .base import Engine, EngineConfig
from .pareto import (
    binary_tournament,
    crowding_distances,
    non_dominated_ranks,
    nsga_survivor_indices,
)

__all__ = [
    "ConstrainedNoveltySearch",
    "ConstrainedNoveltySearchFI2NS",
    "ConstrainedSurpriseSearch",
    "NoveltyLocalCompetition",
    "SurpriseLocalCompetition",
    "ObjectiveGA",
]


class PopulationEngine(Engine):
    """Shared generational machinery.

    ``selection_log`` records (generation, pool label, parent id) for
    every parent pick so paired runs can be diffed.
    """

    uses_grid = False

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.selection_log: list[tuple[int, str, int]] = []

    def _seed_count(self) -> int:
        return self.config.population_size

    def _tournament(self, scores: np.ndarray) -> int:
        """Binary tournament, higher score wins, tie keeps the first draw."""
        i, j = self.rng_select.integers(len(scores), size=2)
        i, j = int(i), int(j)
        return i if scores[i] >= scores[j] else j

    def _build_pairs(
        self, pool: list[Individual], scores: np.ndarray, n: int, label: str
    ) -> list[tuple[Individual, Optional[Individual]]]:
        pairs = []
        for _ in range(n):
            a = pool[self._tournament(scores)]
            self.selection_log.append((self.generation + 1, label, a.id))
            mate = None
            if (
                len(pool) > 1
                and self.rng_vary.random() < self.config.crossover_rate
            ):
                mate = pool[self._tournament(scores)]
            pairs.append((a, mate))
        return pairs

    def _distance_rows(self, members: list[Individual]) -> np.ndarray:
        return np.vstack([self.domain.distance_vector(m) for m in members])


class _TwoPopEngine(PopulationEngine):
    """Feasible/infeasible split shared by CNS and CSS.

    Offspring are allocated to parent pools proportionally to pool
    sizes (each nonempty pool gets at least one slot); an empty pool
    cedes all slots to the other.
    """

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.pops = TwoPopulations(
            feasible_capacity=config.population_size,
            infeasible_capacity=config.population_size,
        )
        # id -> score snapshot used for tournament and routing eviction
        self._objective: dict[int, float] = {}

    def _initialize_population(self, individuals: list[Individual]):
        for ind in individuals:
            route_offspring(
                ind, self.pops, self._feasible_key, self._infeasible_key
            )

    def _has_individuals(self) -> bool:
        return bool(self.pops.feasible or self.pops.infeasible)

    def _feasible_key(self, ind: Individual) -> float:
        return self._objective.get(ind.id, 0.0)

    def _infeasible_key(self, ind: Individual) -> float:
        raise NotImplementedError

    def _pool_feasible_scores(self, pool: list[Individual]) -> np.ndarray:
        raise NotImplementedError

    def _pool_infeasible_scores(self, pool: list[Individual]) -> np.ndarray:
        raise NotImplementedError

    def _process_arrivals(self, offspring: list[Individual]):
        """Score arrivals against the pre-update state and cache the
        values routing eviction will use."""
        raise NotImplementedError

    def _end_generation(self):
        pass

    def _iterate(self, max_evaluations: int):
        n = min(self.config.population_size, max_evaluations)
        feas, infeas = self.pops.feasible, self.pops.infeasible
        scores_f = self._pool_feasible_scores(feas)
        scores_i = self._pool_infeasible_scores(infeas)
        for ind, s in zip(feas, scores_f):
            self._objective[ind.id] = float(s)
        for ind, s in zip(infeas, scores_i):
            self._objective[ind.id] = float(s)

        if feas and infeas:
            n_f = min(n - 1, max(1, (n * len(feas)) // (len(feas) + len(infeas))))
            n_i = n - n_f
        elif feas:
            n_f, n_i = n, 0
        else:
            n_f, n_i = 0, n
        pairs = self._build_pairs(feas, scores_f, n_f, "feasible")
        pairs += self._build_pairs(infeas, scores_i, n_i, "infeasible")

        offspring = self._spawn_batch(pairs, self.generation + 1)
        self._process_arrivals(offspring)
        for child in offspring:
            route_offspring(
                child, self.pops, self._feasible_key, self._infeasible_key
            )
        self._end_generation()

    def report_elites(self) -> list[Individual]:
        by_id = {ind.id: ind for ind in self.pops.feasible}
        return [by_id[i] for i in sorted(by_id)]


class ConstrainedNoveltySearch(_TwoPopEngine):
    """FI-2Pop where the feasible side chases novelty.

    Feasible members score novelty against the feasible pool plus the
    archive; the infeasible side minimizes distance from feasibility.
    Feasible arrivals are considered for the archive against the
    pre-update reference state; an arrival facing an empty reference set
    is trivially novel and admitted.
    """

    algorithm = "CNS-FINS"
    infeasible_novelty = False

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        threshold = config.novelty_threshold
        if threshold is None:
            threshold = domain.default_novelty_threshold()
        self.novelty_archive = NoveltyArchive(add_threshold=threshold)
        self.archived: dict[int, Individual] = {}

    def _novelty_of(
        self, members: list[Individual], in_references: bool
    ) -> np.ndarray:
        """Novelty vs the feasible pool + archive (subjects included in
        the reference set when they are pool members)."""
        vectors = self._distance_rows(members)
        pool_rows = (
            self._distance_rows(self.pops.feasible)
            if self.pops.feasible
            else np.empty((0, vectors.shape[1]))
        )
        refs = np.vstack(
            [pool_rows, self.novelty_archive.as_array(vectors.shape[1])]
        )
        if refs.shape[0] == 0 or (in_references and refs.shape[0] == 1):
            # lone member or first arrival: trivially novel
            return np.full(len(members), math.inf)
        return novelty_scores(
            vectors,
            refs,
            k=self.config.novelty_k,
            subjects_in_references=in_references,
            metric=self.domain.distance_metric,
        )

    def _pool_feasible_scores(self, pool: list[Individual]) -> np.ndarray:
        if not pool:
            return np.empty(0)
        scores = self._novelty_of(pool, in_references=True)
        return np.where(np.isinf(scores), 0.0, scores)

    def _pool_infeasible_scores(self, pool: list[Individual]) -> np.ndarray:
        if not pool:
            return np.empty(0)
        if not self.infeasible_novelty:
            return np.array([infeasible_objective(ind) for ind in pool])
        vectors = self._distance_rows(pool)
        if len(pool) == 1:
            return np.zeros(1)
        return novelty_scores(
            vectors,
            vectors,
            k=self.config.novelty_k,
            subjects_in_references=True,
            metric=self.domain.distance_metric,
        )

    def _infeasible_key(self, ind: Individual) -> float:
        if self.infeasible_novelty:
            return self._objective.get(ind.id, 0.0)
        return infeasible_objective(ind)

    def _process_arrivals(self, offspring: list[Individual]):
        candidates = [
            c
            for c in offspring
            if c.evaluation.feasible or self.config.infeasible_in_archive
        ]
        if candidates:
            scores = self._novelty_of(candidates, in_references=False)
            for child, score in zip(candidates, scores):
                self._objective[child.id] = 0.0 if math.isinf(score) else float(score)
                if archive_consider(
                    self.domain.distance_vector(child),
                    float(score),
                    self.novelty_archive,
                    fitness=child.fitness,
                    individual_id=child.id,
                ):
                    self.archived[child.id] = child
        if self.infeasible_novelty:
            infeas_kids = [c for c in offspring if not c.evaluation.feasible]
            if infeas_kids:
                vectors = self._distance_rows(infeas_kids)
                pool = self.pops.infeasible
                if pool:
                    refs = self._distance_rows(pool)
                    scores = novelty_scores(
                        vectors,
                        refs,
                        k=self.config.novelty_k,
                        subjects_in_references=False,
                        metric=self.domain.distance_metric,
                    )
                else:
                    scores = np.zeros(len(infeas_kids))
                for child, score in zip(infeas_kids, scores):
                    self._objective[child.id] = float(score)

    def report_elites(self) -> list[Individual]:
        by_id = {ind.id: ind for ind in self.archived.values()}
        for ind in self.pops.feasible:
            by_id[ind.id] = ind
        return [by_id[i] for i in sorted(by_id)]

    def archive_sizes(self) -> dict[str, int]:
        return {
            "feasible": len(self.pops.feasible),
            "infeasible": len(self.pops.infeasible),
            "novelty_archive": len(self.novelty_archive),
        }


class ConstrainedNoveltySearchFI2NS(ConstrainedNoveltySearch):
    """CNS variant where the infeasible side also chases novelty,
    measured within the infeasible population alone."""

    algorithm = "CNS-FI2NS"
    infeasible_novelty = True


class ConstrainedSurpriseSearch(_TwoPopEngine):
    """FI-2Pop where the feasible side chases surprise.

    Each generation the feasible pool is summarized into centroids;
    once two summaries exist, members score by distance from the
    extrapolated centroids. Before that the score is flat, which makes
    the tournament a uniform draw (and routing evict oldest-first).
    """

    algorithm = "CSS"

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.model = SurpriseModel(centroids=config.surprise_centroids)
        self._mode = "uniform"

    def _descriptor_rows(self, members: list[Individual]) -> np.ndarray:
        return np.vstack([m.evaluation.descriptor for m in members])

    def _surprise_of(self, members: list[Individual]) -> np.ndarray:
        if not self.model.ready:
            return np.zeros(len(members))
        predicted = surprise_predict(self.model)
        return surprise_scores(self._descriptor_rows(members), predicted)

    def _pool_feasible_scores(self, pool: list[Individual]) -> np.ndarray:
        self._mode = "surprise" if self.model.ready else "uniform"
        if not pool:
            return np.empty(0)
        return self._surprise_of(pool)

    def _pool_infeasible_scores(self, pool: list[Individual]) -> np.ndarray:
        if not pool:
            return np.empty(0)
        return np.array([infeasible_objective(ind) for ind in pool])

    def _infeasible_key(self, ind: Individual) -> float:
        return infeasible_objective(ind)

    def _process_arrivals(self, offspring: list[Individual]):
        feas_kids = [c for c in offspring if c.evaluation.feasible]
        if feas_kids:
            for child, score in zip(feas_kids, self._surprise_of(feas_kids)):
                self._objective[child.id] = float(score)

    def _end_generation(self):
        if self.pops.feasible:
            summary = summarize_generation(
                self._descriptor_rows(self.pops.feasible),
                self.config.surprise_centroids,
                self.rng_aux,
            )
            self.model.observe(summary)

    def _metric_extras(self):
        return {
            "selection_mode": self._mode,
            "history_depth": len(self.model.history),
        }

    def archive_sizes(self) -> dict[str, int]:
        return {
            "feasible": len(self.pops.feasible),
            "infeasible": len(self.pops.infeasible),
        }


class NoveltyLocalCompetition(PopulationEngine):
    """Two-objective search over (novelty, local competition).

    Both objectives are scored against the population plus the novelty
    archive; parents win binary tournaments on (rank, crowding) and the
    same ordering picks survivors from parents + offspring.
    """

    algorithm = "NS-LC"
    divergence_label = "novelty"

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.population: list[Individual] = []
        threshold = config.novelty_threshold
        if threshold is None:
            threshold = domain.default_novelty_threshold()
        self.novelty_archive = NoveltyArchive(add_threshold=threshold)
        self.archived: dict[int, Individual] = {}
        self.last_objectives: dict[int, tuple[float, float]] = {}

    def _initialize_population(self, individuals: list[Individual]):
        self.population = list(individuals)

    def _has_individuals(self) -> bool:
        return bool(self.population)

    def _objectives(self, members: list[Individual]) -> np.ndarray:
        vectors = self._distance_rows(members)
        fitnesses = np.array([m.fitness for m in members])
        refs = np.vstack(
            [vectors, self.novelty_archive.as_array(vectors.shape[1])]
        )
        ref_fits = np.concatenate(
            [fitnesses, np.asarray(self.novelty_archive.fitnesses)]
        )
        if refs.shape[0] == 1:
            return np.zeros((1, 2))
        novelty = novelty_scores(
            vectors,
            refs,
            k=self.config.novelty_k,
            subjects_in_references=True,
            metric=self.domain.distance_metric,
        )
        distances = pairwise_distances(vectors, refs, self.domain.distance_metric)
        lc = local_competition_scores(
            fitnesses,
            distances,
            ref_fits,
            k=self.config.lc_neighbors,
            subjects_in_references=True,
        )
        return np.column_stack([novelty, lc.astype(np.float64)])

    def _admit_arrivals(self, offspring: list[Individual]):
        vectors = self._distance_rows(offspring)
        pool_rows = self._distance_rows(self.population)
        refs = np.vstack(
            [pool_rows, self.novelty_archive.as_array(vectors.shape[1])]
        )
        scores = novelty_scores(
            vectors,
            refs,
            k=self.config.novelty_k,
            subjects_in_references=False,
            metric=self.domain.distance_metric,
        )
        for child, score in zip(offspring, scores):
            if archive_consider(
                self.domain.distance_vector(child),
                float(score),
                self.novelty_archive,
                fitness=child.fitness,
                individual_id=child.id,
            ):
                self.archived[child.id] = child

    def _iterate(self, max_evaluations: int):
        n = min(self.config.population_size, max_evaluations)
        objectives = self._objectives(self.population)
        ranks = non_dominated_ranks(objectives)
        crowding = crowding_distances(objectives, ranks)
        pairs = []
        for _ in range(n):
            a = self.population[binary_tournament(ranks, crowding, self.rng_select)]
            self.selection_log.append((self.generation + 1, "population", a.id))
            mate = None
            if (
                len(self.population) > 1
                and self.rng_vary.random() < self.config.crossover_rate
            ):
                mate = self.population[
                    binary_tournament(ranks, crowding, self.rng_select)
                ]
            pairs.append((a, mate))
        offspring = self._spawn_batch(pairs, self.generation + 1)
        self._admit_arrivals(offspring)
        combined = self.population + offspring
        objectives = self._objectives(combined)
        self.last_objectives = {
            ind.id: (float(objectives[i, 0]), float(objectives[i, 1]))
            for i, ind in enumerate(combined)
        }
        keep = nsga_survivor_indices(objectives, self.config.population_size)
        self.population = [combined[i] for i in keep]
        self._end_generation()

    def _end_generation(self):
        pass

    def report_elites(self) -> list[Individual]:
        by_id = {ind.id: ind for ind in self.archived.values()}
        for ind in self.population:
            by_id[ind.id] = ind
        return [by_id[i] for i in sorted(by_id)]

    def archive_sizes(self) -> dict[str, int]:
        return {
            "population": len(self.population),
            "novelty_archive": len(self.novelty_archive),
        }


class SurpriseLocalCompetition(NoveltyLocalCompetition):
    """Two-objective search over (surprise, local competition).

    No novelty archive: surprise comes from the centroid forecast and
    local competition is measured within the population alone. Until
    two summaries exist the surprise objective is flat at zero.
    """

    algorithm = "SS-LC"
    divergence_label = "surprise"

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.model = SurpriseModel(centroids=config.surprise_centroids)
        del self.novelty_archive, self.archived

    def _objectives(self, members: list[Individual]) -> np.ndarray:
        descriptors = np.vstack([m.evaluation.descriptor for m in members])
        fitnesses = np.array([m.fitness for m in members])
        if self.model.ready:
            surprise = surprise_scores(descriptors, surprise_predict(self.model))
        else:
            surprise = np.zeros(len(members))
        if len(members) == 1:
            lc = np.zeros(1)
        else:
            vectors = self._distance_rows(members)
            distances = pairwise_distances(
                vectors, vectors, self.domain.distance_metric
            )
            lc = local_competition_scores(
                fitnesses,
                distances,
                fitnesses,
                k=self.config.lc_neighbors,
                subjects_in_references=True,
            ).astype(np.float64)
        return np.column_stack([surprise, lc])

    def _admit_arrivals(self, offspring: list[Individual]):
        pass

    def _end_generation(self):
        if self.population:
            summary = summarize_generation(
                np.vstack([m.evaluation.descriptor for m in self.population]),
                self.config.surprise_centroids,
                self.rng_aux,
            )
            self.model.observe(summary)

    def report_elites(self) -> list[Individual]:
        return sorted(self.population, key=lambda ind: ind.id)

    def archive_sizes(self) -> dict[str, int]:
        return {
            "population": len(self.population),
            "history_depth": len(self.model.history),
        }


class ObjectiveGA(PopulationEngine):
    """Objective-only generational GA: tournament of three on fitness,
    parents + offspring truncated back to the population size. The
    benchmarking baseline; no diversity machinery at all."""

    algorithm = "GA"

    def __init__(self, domain, config: EngineConfig, seed: int):
        super().__init__(domain, config, seed)
        self.population: list[Individual] = []

    def _initialize_population(self, individuals: list[Individual]):
        self.population = list(individuals)

    def _has_individuals(self) -> bool:
        return bool(self.population)

    def _tournament3(self, fitnesses: np.ndarray) -> int:
        draws = self.rng_select.integers(len(fitnesses), size=3)
        return int(draws[int(np.argmax(fitnesses[draws]))])

    def _iterate(self, max_evaluations: int):
        n = min(self.config.population_size, max_evaluations)
        fitnesses = np.array([m.fitness for m in self.population])
        pairs = []
        for _ in range(n):
            a = self.population[self._tournament3(fitnesses)]
            self.selection_log.append((self.generation + 1, "population", a.id))
            mate = None
            if (
                len(self.population) > 1
                and self.rng_vary.random() < self.config.crossover_rate
            ):
                mate = self.population[self._tournament3(fitnesses)]
            pairs.append((a, mate))
        offspring = self._spawn_batch(pairs, self.generation + 1)
        combined = self.population + offspring
        order = sorted(
            range(len(combined)),
            key=lambda i: (-combined[i].fitness, combined[i].id),
        )
        self.population = [
            combined[i] for i in order[: self.config.population_size]
        ]

    def report_elites(self) -> list[Individual]:
        return sorted(self.population, key=lambda ind: ind.id)

    def archive_sizes(self) -> dict[str, int]:
        return {"population": len(self.population)}
