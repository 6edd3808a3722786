"""Quality-diversity search engines for procedural content generation.

Ten interchangeable engines (grid archives, constrained two-population
searches, divergence-driven local competition, and an objective-only
baseline) over pluggable content domains, with expressivity reporting,
deterministic persistence, a CLI, and an HTTP steering service.
"""
from .core import (
    ConfigError,
    DomainSpec,
    EngineError,
    Evaluation,
    Individual,
    MalformedGenomeError,
    rng_stream,
)
from .engines import ENGINES, EngineConfig, create_engine, validate_engine_config
from .domains import DOMAINS, build_domain
from .analysis import (
    CellRecord,
    ExpressivityReport,
    LineageNode,
    common_ancestors,
    heatmap_export,
    lineage_trace,
    snapshot,
)
from .config import RunConfig, build_run, load_run_config, parse_run_config
from .partition import BoundarySet, GridSpec
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "BoundarySet",
    "CellRecord",
    "ConfigError",
    "DOMAINS",
    "DomainSpec",
    "ENGINES",
    "EngineConfig",
    "EngineError",
    "Evaluation",
    "ExpressivityReport",
    "GridSpec",
    "Individual",
    "LineageNode",
    "MalformedGenomeError",
    "RunConfig",
    "build_domain",
    "build_run",
    "common_ancestors",
    "create_app",
    "create_engine",
    "heatmap_export",
    "lineage_trace",
    "load_run_config",
    "parse_run_config",
    "rng_stream",
    "snapshot",
    "validate_engine_config",
    "__version__",
]
