"""Shared search primitives: evaluation records, individuals, the domain
contract, and seeded random streams.

Everything downstream (partitioning, divergence scoring, the engines) is
built on the three invariants enforced here:

* an ``Evaluation`` is feasible exactly when its infeasibility is zero,
* fitness is always normalized into [0, 1],
* evaluation is deterministic, so re-evaluating a stored genome must
  reproduce the stored record bit for bit.
"""
from __future__ import annotations

import os
import zlib
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

__all__ = [
    "MalformedGenomeError",
    "ConfigError",
    "EngineError",
    "Evaluation",
    "Individual",
    "DomainSpec",
    "rng_stream",
    "child_genome",
    "spawn_offspring",
    "evaluate_batch",
    "eval_threads",
]

THREADS_ENV = "ILLUMINATE_THREADS"


class MalformedGenomeError(ValueError):
    """Raised by a domain when a genome violates its structural rules."""


class EngineError(RuntimeError):
    """Raised when a run cannot continue (empty archive, exhausted setup)."""


class ConfigError(ValueError):
    """Configuration rejected during validation.

    Carries a list of ``(field, message)`` pairs so callers can print
    field-level diagnostics instead of a single opaque string.
    """

    def __init__(self, problems: Sequence[tuple[str, str]]):
        self.problems = list(problems)
        detail = "; ".join(f"{f}: {m}" for f, m in self.problems)
        super().__init__(f"invalid configuration: {detail}")


def rng_stream(master_seed: int, label: str) -> np.random.Generator:
    """Derive a named child generator from the master seed.

    The stream for a label depends only on ``(master_seed, crc32(label))``,
    so each consumer owns an independent stream and adding a new consumer
    under a fresh label never perturbs the draws of existing ones. This is
    the whole reproducibility story: every stochastic component asks for
    its own labelled stream exactly once.
    """
    key = zlib.crc32(label.encode("utf8"))
    return np.random.default_rng(np.random.SeedSequence([master_seed, key]))


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Immutable result of evaluating one genome.

    Attributes:
        fitness: quality in [0, 1].
        descriptor: behavior characterization, a float vector.
        feasible: constraint satisfaction flag.
        infeasibility: distance from feasibility, zero iff feasible.
    """

    fitness: float
    descriptor: np.ndarray
    feasible: bool
    infeasibility: float

    def __post_init__(self):
        desc = np.asarray(self.descriptor, dtype=np.float64)
        if desc.ndim != 1:
            raise ValueError("descriptor must be a flat vector")
        if not np.all(np.isfinite(desc)):
            raise ValueError("descriptor contains non-finite values")
        desc.setflags(write=False)
        object.__setattr__(self, "descriptor", desc)
        object.__setattr__(self, "fitness", float(self.fitness))
        object.__setattr__(self, "infeasibility", float(self.infeasibility))
        object.__setattr__(self, "feasible", bool(self.feasible))
        if not (0.0 <= self.fitness <= 1.0) or not np.isfinite(self.fitness):
            raise ValueError(f"fitness {self.fitness} outside [0, 1]")
        if self.infeasibility < 0.0 or not np.isfinite(self.infeasibility):
            raise ValueError(f"infeasibility {self.infeasibility} must be >= 0")
        if self.feasible != (self.infeasibility == 0.0):
            raise ValueError(
                "feasible flag must hold exactly when infeasibility is zero"
            )

    def same_as(self, other: "Evaluation") -> bool:
        """Exact equality, used by persistence round-trip checks."""
        return (
            self.fitness == other.fitness
            and self.feasible == other.feasible
            and self.infeasibility == other.infeasibility
            and self.descriptor.shape == other.descriptor.shape
            and bool(np.all(self.descriptor == other.descriptor))
        )


@dataclass(eq=False)
class Individual:
    """One evaluated genome with its lineage bookkeeping.

    ``parents`` holds zero ids for seeded individuals, one for mutation
    offspring and two for crossover offspring.
    """

    id: int
    genome: Any
    evaluation: Evaluation
    parents: tuple[int, ...] = ()
    birth_generation: int = 0

    def __post_init__(self):
        if len(self.parents) > 2:
            raise ValueError("an individual has at most two parents")

    @property
    def fitness(self) -> float:
        return self.evaluation.fitness

    @property
    def variation(self) -> str:
        """How this individual came to be: seed, mutation or crossover."""
        return ("seed", "mutation", "crossover")[len(self.parents)]


class DomainSpec(ABC):
    """Contract a content domain implements to plug into any engine.

    A domain owns its genome representation, variation operators,
    deterministic evaluation, and a text serialization used by the
    archive dumps. ``evaluate`` must be a pure function of the genome.
    """

    name: str = "domain"

    @property
    @abstractmethod
    def descriptor_dims(self) -> int:
        """Number of behavior descriptor dimensions."""

    @property
    @abstractmethod
    def descriptor_bounds(self) -> tuple[tuple[float, float], ...]:
        """Per-dimension (low, high) bounds of the descriptor space."""

    @property
    def descriptor_names(self) -> tuple[str, ...]:
        return tuple(f"d{i}" for i in range(self.descriptor_dims))

    @abstractmethod
    def random_genome(self, rng: np.random.Generator) -> Any:
        ...

    @abstractmethod
    def mutate(self, genome: Any, rng: np.random.Generator) -> Any:
        ...

    @abstractmethod
    def crossover(self, a: Any, b: Any, rng: np.random.Generator) -> Any:
        ...

    @abstractmethod
    def evaluate(self, genome: Any) -> Evaluation:
        ...

    @abstractmethod
    def genome_to_text(self, genome: Any) -> str:
        ...

    @abstractmethod
    def genome_from_text(self, text: str) -> Any:
        ...

    # Behavior distance hooks. Distance-driven engines (novelty, local
    # competition) score individuals in this space; by default it is the
    # descriptor space under Euclidean distance.

    def distance_vector(self, individual: Individual) -> np.ndarray:
        return individual.evaluation.descriptor

    @property
    def distance_metric(self) -> str:
        """Either "euclidean" or "hamming" (count of unequal entries)."""
        return "euclidean"

    def default_novelty_threshold(self) -> float:
        """Archive admission threshold scaled to this distance space."""
        return 0.05


def child_genome(
    domain: DomainSpec,
    parent_a: Individual,
    parent_b: Optional[Individual],
    rng: np.random.Generator,
) -> Any:
    """Produce one offspring genome: crossover when a mate is given, then
    mutation. The generator fully determines the outcome."""
    if parent_b is not None:
        genome = domain.crossover(parent_a.genome, parent_b.genome, rng)
    else:
        genome = parent_a.genome
    return domain.mutate(genome, rng)


def spawn_offspring(
    domain: DomainSpec,
    parent_a: Individual,
    parent_b: Optional[Individual],
    rng: np.random.Generator,
    child_id: int,
    generation: int,
) -> Individual:
    """Generate and evaluate one offspring with lineage recorded."""
    genome = child_genome(domain, parent_a, parent_b, rng)
    parents = (parent_a.id,) if parent_b is None else (parent_a.id, parent_b.id)
    return Individual(
        id=child_id,
        genome=genome,
        evaluation=domain.evaluate(genome),
        parents=parents,
        birth_generation=generation,
    )


def eval_threads() -> int:
    """Evaluation parallelism cap from the environment (default 1)."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def evaluate_batch(domain: DomainSpec, genomes: Sequence[Any]) -> list[Evaluation]:
    """Evaluate a batch of genomes, in parallel when ILLUMINATE_THREADS > 1.

    Results are returned in input order; evaluation is pure, so the
    parallel and serial paths produce identical records.
    """
    workers = eval_threads()
    if workers <= 1 or len(genomes) <= 1:
        return [domain.evaluate(g) for g in genomes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(domain.evaluate, genomes))
