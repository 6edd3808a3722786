"""Engine registry: name -> class, config validation and construction.

The registry is the single place that knows which algorithm takes which
archive machinery, so conformance rules (grid engines demand a grid,
population engines refuse one) live here rather than in each engine.
"""
from __future__ import annotations

from typing import Optional

from ..core import ConfigError, DomainSpec
from .base import Engine, EngineConfig
from .map_based import (
    ConstrainedMapElites,
    MapElites,
    MapElitesNovelty,
    SlidingBoundariesMapElites,
)
from .population import (
    ConstrainedNoveltySearch,
    ConstrainedNoveltySearchFI2NS,
    ConstrainedSurpriseSearch,
    NoveltyLocalCompetition,
    ObjectiveGA,
    SurpriseLocalCompetition,
)

__all__ = [
    "ENGINES",
    "Engine",
    "EngineConfig",
    "validate_engine_config",
    "create_engine",
    "MapElites",
    "MapElitesNovelty",
    "SlidingBoundariesMapElites",
    "ConstrainedMapElites",
    "ConstrainedNoveltySearch",
    "ConstrainedNoveltySearchFI2NS",
    "ConstrainedSurpriseSearch",
    "NoveltyLocalCompetition",
    "SurpriseLocalCompetition",
    "ObjectiveGA",
]

ENGINES: dict[str, type[Engine]] = {
    "ME": MapElites,
    "ME-NOV": MapElitesNovelty,
    "MESB": SlidingBoundariesMapElites,
    "CNS-FINS": ConstrainedNoveltySearch,
    "CNS-FI2NS": ConstrainedNoveltySearchFI2NS,
    "CSS": ConstrainedSurpriseSearch,
    "CME": ConstrainedMapElites,
    "NS-LC": NoveltyLocalCompetition,
    "SS-LC": SurpriseLocalCompetition,
    "GA": ObjectiveGA,
}


def _positive_int(problems, field: str, value, minimum: int = 1):
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        problems.append((field, f"must be an integer >= {minimum}"))
        return False
    return True


def validate_engine_config(
    config: EngineConfig, domain: Optional[DomainSpec] = None
) -> list[tuple[str, str]]:
    """Return (field, message) problems; empty list means valid."""
    problems: list[tuple[str, str]] = []
    cls = ENGINES.get(config.algorithm)
    if cls is None:
        known = ", ".join(sorted(ENGINES))
        problems.append(
            ("algorithm", f"unknown algorithm {config.algorithm!r}; one of: {known}")
        )
        return problems

    _positive_int(problems, "budget", config.budget)
    _positive_int(problems, "init_count", config.init_count)
    _positive_int(problems, "batch_size", config.batch_size)
    _positive_int(problems, "population_size", config.population_size)
    _positive_int(problems, "novelty_k", config.novelty_k)
    _positive_int(problems, "lc_neighbors", config.lc_neighbors)
    _positive_int(problems, "surprise_centroids", config.surprise_centroids)
    _positive_int(problems, "sliding_interval", config.sliding_interval)
    _positive_int(problems, "cell_capacity", config.cell_capacity)
    _positive_int(problems, "reference_resolution", config.reference_resolution)

    if not (0.0 <= config.crossover_rate <= 1.0):
        problems.append(("crossover_rate", "must lie in [0, 1]"))
    if config.novelty_threshold is not None and not config.novelty_threshold > 0:
        problems.append(("novelty_threshold", "must be positive when given"))
    if not config.novelty_floor > 0:
        problems.append(("novelty_floor", "must be positive"))
    if config.target_coverage is not None and not (
        0.0 < config.target_coverage <= 1.0
    ):
        problems.append(("target_coverage", "must lie in (0, 1]"))

    seeds = config.init_count if cls.uses_grid else config.population_size
    seed_field = "init_count" if cls.uses_grid else "population_size"
    if isinstance(config.budget, int) and isinstance(seeds, int):
        if config.budget < seeds:
            problems.append(
                ("budget", f"must be at least {seed_field} ({seeds})")
            )

    if cls.uses_grid:
        kinds = cls.grid_kinds
        if config.grid_kind is not None and config.grid_kind not in kinds:
            problems.append(
                (
                    "grid_kind",
                    f"{config.algorithm} supports {'/'.join(kinds)} grids, "
                    f"got {config.grid_kind!r}",
                )
            )
        kind = config.grid_kind or kinds[0]
        if config.grid_resolution is not None:
            res = config.grid_resolution
            if domain is not None and len(res) != domain.descriptor_dims:
                problems.append(
                    (
                        "grid_resolution",
                        f"needs {domain.descriptor_dims} entries "
                        f"(one per descriptor dimension), got {len(res)}",
                    )
                )
            if any(r < 1 for r in res):
                problems.append(
                    ("grid_resolution", "every dimension needs at least one bin")
                )
            if kind == "binary" and any(r != 2 for r in res):
                problems.append(
                    ("grid_resolution", "binary grids fix resolution at 2 per dimension")
                )
    else:
        for field in ("grid_kind", "grid_resolution"):
            if getattr(config, field) is not None:
                problems.append(
                    (field, f"{config.algorithm} does not use a grid archive")
                )

    return problems


def create_engine(domain: DomainSpec, config: EngineConfig, seed: int) -> Engine:
    """Validate the config against the domain and build the engine."""
    problems = validate_engine_config(config, domain)
    if problems:
        raise ConfigError(problems)
    return ENGINES[config.algorithm](domain, config, seed)
