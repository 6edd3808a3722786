"""Content domains pluggable into any engine."""
from __future__ import annotations

from typing import Any

from ..core import ConfigError, DomainSpec
from .deceptive import DeceptiveDomain
from .levels import TileLevelDomain, level_distance

__all__ = ["TileLevelDomain", "DeceptiveDomain", "level_distance", "build_domain", "DOMAINS"]

DOMAINS = {
    "tile_level": TileLevelDomain,
    "deceptive": DeceptiveDomain,
}
_BUILDERS = DOMAINS


def build_domain(config: dict[str, Any]) -> DomainSpec:
    """Instantiate a domain from its config mapping ({"name": ..., params})."""
    if not isinstance(config, dict):
        raise ConfigError([("domain", "must be an object")])
    name = config.get("name")
    if name not in _BUILDERS:
        known = ", ".join(sorted(_BUILDERS))
        raise ConfigError([("domain.name", f"unknown domain {name!r}, one of: {known}")])
    params = {k: v for k, v in config.items() if k != "name"}
    try:
        return _BUILDERS[name](**params)
    except TypeError as exc:
        raise ConfigError([("domain", f"bad parameters: {exc}")]) from exc
    except ValueError as exc:
        raise ConfigError([("domain", str(exc))]) from exc
