"""Shared fixtures: tiny synthetic domains that make engine behavior
fully predictable (constant fitness, pinned descriptors, rigged
feasibility, skewed distributions)."""
from __future__ import annotations

import numpy as np
import pytest

from illuminate.core import DomainSpec, Evaluation, MalformedGenomeError


class FloatDomain(DomainSpec):
    """Genome is one float in [0, 1]; fitness equals the genome.

    Descriptor is (g, 1 - g) so maps fill along a diagonal. The base
    class for most rigged variants below.
    """

    name = "float"

    def __init__(self, eval_counter: list | None = None):
        self.eval_counter = eval_counter

    @property
    def descriptor_dims(self) -> int:
        return 2

    @property
    def descriptor_bounds(self):
        return ((0.0, 1.0), (0.0, 1.0))

    def random_genome(self, rng):
        return float(rng.uniform(0.0, 1.0))

    def mutate(self, genome, rng):
        return float(np.clip(genome + rng.normal(0.0, 0.1), 0.0, 1.0))

    def crossover(self, a, b, rng):
        alpha = rng.uniform()
        return float(alpha * a + (1.0 - alpha) * b)

    def _fitness(self, genome: float) -> float:
        return float(genome)

    def _descriptor(self, genome: float) -> np.ndarray:
        return np.array([genome, 1.0 - genome])

    def _feasibility(self, genome: float) -> tuple[bool, float]:
        return True, 0.0

    def evaluate(self, genome):
        if self.eval_counter is not None:
            self.eval_counter.append(genome)
        genome = float(genome)
        if not np.isfinite(genome):
            raise MalformedGenomeError("genome must be a finite float")
        feasible, infeasibility = self._feasibility(genome)
        return Evaluation(
            fitness=self._fitness(genome) if feasible else 0.0,
            descriptor=self._descriptor(genome),
            feasible=feasible,
            infeasibility=infeasibility,
        )

    def genome_to_text(self, genome):
        return repr(float(genome))

    def genome_from_text(self, text):
        return float(text)


class ConstantFitnessDomain(FloatDomain):
    name = "constant"

    def _fitness(self, genome):
        return 0.5


class OneCellDomain(FloatDomain):
    """Every genome lands in the same cell: (1+1) hill-climber setup."""

    name = "one_cell"

    def _descriptor(self, genome):
        return np.array([0.5, 0.5])


class RiggedFeasibilityDomain(FloatDomain):
    """Genomes below 0.5 are infeasible with infeasibility = 0.5 - g."""

    name = "rigged"

    def _feasibility(self, genome):
        if genome >= 0.5:
            return True, 0.0
        return False, float(0.5 - genome)


class SkewedDomain(DomainSpec):
    """1-D descriptor with 90% of random mass in [0, 0.1]."""

    name = "skewed"

    @property
    def descriptor_dims(self) -> int:
        return 1

    @property
    def descriptor_bounds(self):
        return ((0.0, 1.0),)

    def random_genome(self, rng):
        if rng.uniform() < 0.9:
            return float(rng.uniform(0.0, 0.1))
        return float(rng.uniform(0.1, 1.0))

    def mutate(self, genome, rng):
        # small moves keep the skew; occasional resample explores
        if rng.uniform() < 0.2:
            return self.random_genome(rng)
        return float(np.clip(genome + rng.normal(0.0, 0.02), 0.0, 1.0))

    def crossover(self, a, b, rng):
        alpha = rng.uniform()
        return float(alpha * a + (1.0 - alpha) * b)

    def evaluate(self, genome):
        genome = float(genome)
        return Evaluation(
            fitness=float(genome),
            descriptor=np.array([genome]),
            feasible=True,
            infeasibility=0.0,
        )

    def genome_to_text(self, genome):
        return repr(float(genome))

    def genome_from_text(self, text):
        return float(text)


class StaticPopulationDomain(FloatDomain):
    """Mutation is the identity: the population's descriptors never move.

    Used to pin surprise-search behavior (zero-velocity predictions).
    """

    name = "static"

    def mutate(self, genome, rng):
        rng.normal(0.0, 0.1)  # keep stream consumption comparable
        return float(genome)

    def crossover(self, a, b, rng):
        rng.uniform()
        return float(a)


@pytest.fixture
def float_domain():
    return FloatDomain()


@pytest.fixture
def constant_domain():
    return ConstantFitnessDomain()


@pytest.fixture
def one_cell_domain():
    return OneCellDomain()


@pytest.fixture
def rigged_domain():
    return RiggedFeasibilityDomain()


@pytest.fixture
def skewed_domain():
    return SkewedDomain()
