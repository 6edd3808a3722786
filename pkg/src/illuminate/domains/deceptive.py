"""Deceptive continuous benchmark domain.

Genomes are D reals in [-1, 1]. Fitness climbs smoothly toward a target
point, but an annulus around the target multiplies fitness by 0.1: a
moat that pure objective descent parks outside of. Reaching the inner
region requires retaining and recombining low-fitness stepping stones,
which is what diversity-preserving engines are for.
"""
from __future__ import annotations

import numpy as np

from ..core import DomainSpec, Evaluation, MalformedGenomeError

__all__ = ["DeceptiveDomain"]

MOAT_INNER = 0.3
MOAT_OUTER = 0.5
MOAT_FACTOR = 0.1
HIDDEN_OFFSET = 0.6


class DeceptiveDomain(DomainSpec):
    """Moat-guarded continuous optimization landscape.

    fitness = max(0, 1 - |g - target| / diam), times 0.1 inside the moat
    annulus. ``diam`` is the distance from the target to the farthest
    corner of the box, so the far corner scores exactly 0 and only
    points inside the moat's inner disk score above 1 - inner/diam.
    The descriptor is the first two coordinates mapped to [0, 1]^2.

    The default target sits at the descriptor-plane center but offset to
    0.6 in every hidden coordinate. Centered targets are too easy: blend
    crossover between parents on opposite sides of the moat lands
    children right on top of the target, so even an objective-only
    population hops the moat as soon as it surrounds it. The offset keeps
    the rim fitness below 0.9 (diam stays above 4.74, rim at 0.894) while
    rewarding search that holds onto descriptor-diverse stepping stones
    long enough to align the hidden coordinates.
    """

    name = "deceptive"

    def __init__(
        self,
        dims: int = 10,
        mutation_sigma: float = 0.06,
        mutation_rate: float = 0.5,
        target: np.ndarray | None = None,
    ):
        if dims < 2:
            raise ValueError("need at least two dimensions for the descriptor")
        self.dims = dims
        self.mutation_sigma = mutation_sigma
        self.mutation_rate = mutation_rate
        if target is None:
            target = np.concatenate([np.zeros(2), np.full(dims - 2, HIDDEN_OFFSET)])
        self.target = np.asarray(target, dtype=np.float64)
        if self.target.shape != (dims,):
            raise ValueError("target dimensionality mismatch")
        if np.any(np.abs(self.target) > 1.0):
            raise ValueError("target must lie inside [-1, 1]^D")
        corner = np.maximum(np.abs(-1.0 - self.target), np.abs(1.0 - self.target))
        self.diam = float(np.sqrt(np.sum(corner**2)))

    @property
    def descriptor_dims(self) -> int:
        return 2

    @property
    def descriptor_bounds(self) -> tuple[tuple[float, float], ...]:
        return ((0.0, 1.0), (0.0, 1.0))

    @property
    def descriptor_names(self) -> tuple[str, ...]:
        return ("x0", "x1")

    def random_genome(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-1.0, 1.0, self.dims)

    def mutate(self, genome: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        child = genome.copy()
        mask = rng.random(self.dims) < self.mutation_rate
        noise = rng.normal(0.0, self.mutation_sigma, self.dims)
        child[mask] += noise[mask]
        return np.clip(child, -1.0, 1.0)

    def crossover(
        self, a: np.ndarray, b: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        # blend along the segment between the parents; diverse parents on
        # opposite sides of the moat produce children inside it
        alpha = rng.uniform()
        return alpha * a + (1.0 - alpha) * b

    def evaluate(self, genome: np.ndarray) -> Evaluation:
        g = np.asarray(genome, dtype=np.float64)
        if g.shape != (self.dims,):
            raise MalformedGenomeError(
                f"genome has shape {g.shape}, expected ({self.dims},)"
            )
        if not np.all(np.isfinite(g)):
            raise MalformedGenomeError("genome contains non-finite values")
        dist = float(np.linalg.norm(g - self.target))
        fitness = max(0.0, 1.0 - dist / self.diam)
        if MOAT_INNER <= dist <= MOAT_OUTER:
            fitness *= MOAT_FACTOR
        descriptor = np.clip((g[:2] + 1.0) / 2.0, 0.0, 1.0)
        return Evaluation(
            fitness=fitness,
            descriptor=descriptor,
            feasible=True,
            infeasibility=0.0,
        )

    def genome_to_text(self, genome: np.ndarray) -> str:
        return " ".join(repr(float(x)) for x in genome)

    def genome_from_text(self, text: str) -> np.ndarray:
        try:
            values = [float(tok) for tok in text.split()]
        except ValueError as exc:
            raise MalformedGenomeError(f"bad float literal: {exc}") from exc
        if len(values) != self.dims:
            raise MalformedGenomeError(
                f"expected {self.dims} coordinates, got {len(values)}"
            )
        return np.asarray(values, dtype=np.float64)
