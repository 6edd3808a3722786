"""Run-level configuration: domain selection, engine settings, seed, output.

Config files are JSON. Validation collects every problem as a
(field, message) pair before raising, so command-line users get one
diagnostic per offending field instead of a fail-fast parade.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .core import ConfigError, DomainSpec
from .domains import build_domain
from .engines import EngineConfig, create_engine, validate_engine_config

__all__ = ["RunConfig", "parse_run_config", "load_run_config", "build_run"]

_TOP_KEYS = {"domain", "engine", "seed", "out", "report_cadence"}
_ENGINE_KEYS = {f.name for f in dataclasses.fields(EngineConfig)}


@dataclass
class RunConfig:
    domain: dict[str, Any]
    engine: EngineConfig
    seed: int
    out_dir: str | None = None
    report_cadence: int = 0

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "domain": dict(self.domain),
            "engine": self.engine.to_dict(),
            "seed": self.seed,
            "report_cadence": self.report_cadence,
        }
        if self.out_dir is not None:
            payload["out"] = self.out_dir
        return payload


def _check_int(problems, field: str, value, minimum: int) -> bool:
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append((field, "must be an integer"))
        return False
    if value < minimum:
        problems.append((field, f"must be at least {minimum}"))
        return False
    return True


def parse_run_config(data: Mapping[str, Any]) -> RunConfig:
    """Validate a raw config mapping and build a RunConfig.

    Raises ConfigError carrying every (field, message) problem found.
    """
    problems: list[tuple[str, str]] = []
    if not isinstance(data, Mapping):
        raise ConfigError([("config", "top level must be a JSON object")])
    for key in sorted(set(data) - _TOP_KEYS):
        problems.append((key, "unknown configuration key"))

    domain_raw = data.get("domain")
    domain: DomainSpec | None = None
    if not isinstance(domain_raw, Mapping):
        problems.append(("domain", "required and must be an object"))
        domain_raw = {}
    else:
        try:
            domain = build_domain(dict(domain_raw))
        except ConfigError as exc:
            problems.extend(exc.problems)
        except ValueError as exc:
            problems.append(("domain", str(exc)))

    engine_raw = data.get("engine")
    engine: EngineConfig | None = None
    if not isinstance(engine_raw, Mapping):
        problems.append(("engine", "required and must be an object"))
    else:
        unknown = sorted(set(engine_raw) - _ENGINE_KEYS)
        for key in unknown:
            problems.append((f"engine.{key}", "unknown engine field"))
        known = {k: v for k, v in engine_raw.items() if k in _ENGINE_KEYS}
        try:
            engine = EngineConfig(**known)
        except (TypeError, ValueError) as exc:
            problems.append(("engine", str(exc)))
        if engine is not None:
            for field, msg in validate_engine_config(engine, domain):
                problems.append((f"engine.{field}", msg))

    seed = data.get("seed")
    if seed is None:
        problems.append(("seed", "required"))
        seed = 0
    elif not _check_int(problems, "seed", seed, minimum=0):
        seed = 0

    cadence = data.get("report_cadence", 0)
    if not _check_int(problems, "report_cadence", cadence, minimum=0):
        cadence = 0

    out = data.get("out")
    if out is not None and not isinstance(out, str):
        problems.append(("out", "must be a string path"))
        out = None

    if problems:
        raise ConfigError(problems)
    assert engine is not None
    return RunConfig(
        domain=dict(domain_raw),
        engine=engine,
        seed=int(seed),
        out_dir=out,
        report_cadence=int(cadence),
    )


def load_run_config(path: str | Path, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Read a JSON config file, apply flag overrides, and validate."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([("config", f"cannot read {path}: {exc}")]) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("config", f"invalid JSON in {path}: {exc}")]) from exc
    if not isinstance(data, dict):
        raise ConfigError([("config", "top level must be a JSON object")])
    if overrides:
        for key, value in overrides.items():
            if key == "budget":
                engine = data.get("engine")
                if isinstance(engine, dict):
                    engine["budget"] = value
                else:
                    data["engine"] = {"budget": value}
            else:
                data[key] = value
    return parse_run_config(data)


def build_run(config: RunConfig):
    """Instantiate the configured (domain, engine) pair."""
    domain = build_domain(dict(config.domain))
    engine = create_engine(domain, config.engine, config.seed)
    return domain, engine
