"""HTTP steering interface for mixed-initiative runs.

Runs are created paused and advance only on explicit step requests, so a
human-in-the-loop session is deterministic and replayable from the
request log. One writer per run: stepping holds the run lock, a second
step request gets a conflict. Reads serve the snapshot taken at the last
iteration boundary, never a mid-iteration state. Preference updates
queue and apply at the next boundary.

Error payloads carry machine-readable codes: not_found, conflict,
validation, unsupported.
"""
from __future__ import annotations

import math
import threading
from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .analysis import ExpressivityReport, heatmap_export, lineage_trace, snapshot
from .config import build_run, parse_run_config
from .core import ConfigError

__all__ = ["create_app"]


def _error(status: int, code: str, message: str, **extra: Any) -> JSONResponse:
    body = {"error": {"code": code, "message": message, **extra}}
    return JSONResponse(status_code=status, content=body)


class RunHandle:
    """One hosted run: the engine plus its steering state."""

    def __init__(self, run_id: str, config, domain, engine):
        self.run_id = run_id
        self.config = config
        self.domain = domain
        self.engine = engine
        self.lock = threading.Lock()  # held by the stepping writer
        self.pending_lock = threading.Lock()
        self.pending_preferences: list[tuple[tuple[int, ...], float]] = []
        self.report: ExpressivityReport = snapshot(engine)
        self.selection_counts: dict[str, int] = {}
        self.supports_preferences = bool(getattr(engine, "supports_preferences", False))
        view = engine.map_view()
        self.grid_resolution: Optional[tuple[int, ...]] = (
            view[0].resolution if view is not None else None
        )

    def refresh(self) -> None:
        self.report = snapshot(self.engine)
        if hasattr(self.engine, "selection_count_table"):
            self.selection_counts = self.engine.selection_count_table()

    def summary(self) -> dict:
        return {
            "run_id": self.run_id,
            "algorithm": self.config.engine.algorithm,
            "domain": self.config.domain.get("name"),
            "seed": self.config.seed,
            "budget": self.config.engine.budget,
            "generation": self.engine.generation,
            "evaluations": self.engine.evaluations,
            "finished": self.engine.initialized and self.engine.finished,
            "supports_preferences": self.supports_preferences,
            "resolution": list(self.grid_resolution) if self.grid_resolution else None,
            "descriptor_names": list(self.domain.descriptor_names),
        }


class RunRegistry:
    def __init__(self):
        self._runs: dict[str, RunHandle] = {}
        self._counter = 0
        self._lock = threading.Lock()

    def add(self, config, domain, engine) -> RunHandle:
        with self._lock:
            self._counter += 1
            run_id = f"r{self._counter}"
            handle = RunHandle(run_id, config, domain, engine)
            self._runs[run_id] = handle
            return handle

    def get(self, run_id: str) -> Optional[RunHandle]:
        return self._runs.get(run_id)

    def all(self) -> list[RunHandle]:
        return [self._runs[k] for k in sorted(self._runs, key=lambda r: int(r[1:]))]


def _validate_preference(handle: RunHandle, payload: dict):
    """Returns (cell, weight) or an error response."""
    cell_raw = payload.get("cell")
    weight = payload.get("weight")
    if not isinstance(cell_raw, (list, tuple)) or not all(
        isinstance(c, int) and not isinstance(c, bool) for c in cell_raw
    ):
        return _error(400, "validation", "cell must be a list of integers")
    if isinstance(weight, bool) or not isinstance(weight, (int, float)):
        return _error(400, "validation", "weight must be a number")
    weight = float(weight)
    if not math.isfinite(weight) or weight < 1.0:
        return _error(400, "validation", "weight must be finite and at least 1")
    resolution = handle.grid_resolution
    assert resolution is not None
    if len(cell_raw) != len(resolution):
        return _error(
            400,
            "validation",
            f"cell must have {len(resolution)} indices, got {len(cell_raw)}",
        )
    for c, r in zip(cell_raw, resolution):
        if not 0 <= c < r:
            return _error(400, "validation", f"cell index {c} out of range [0, {r})")
    return tuple(cell_raw), weight


def _apply_pending(handle: RunHandle) -> None:
    with handle.pending_lock:
        pending = list(handle.pending_preferences)
        handle.pending_preferences.clear()
    for cell, weight in pending:
        handle.engine.set_preference(cell, weight)


def _advance(handle: RunHandle, generations: int) -> None:
    engine = handle.engine
    for _ in range(generations):
        _apply_pending(handle)
        engine.step(1)
        handle.refresh()
        if engine.finished:
            break


async def _json_body(request: Request) -> Optional[dict]:
    try:
        body = await request.json()
    except Exception:  # noqa: BLE001 - malformed body is a client error
        return None
    return body if isinstance(body, dict) else None


def create_app(ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="illuminate steering service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = RunRegistry()
    app.state.registry = registry

    @app.post("/runs")
    async def start_run(request: Request):
        body = await _json_body(request)
        if body is None:
            return _error(400, "validation", "body must be a JSON object")
        try:
            config = parse_run_config(body)
        except ConfigError as exc:
            return _error(
                400,
                "validation",
                "invalid configuration",
                problems=[{"field": f, "message": m} for f, m in exc.problems],
            )
        domain, engine = build_run(config)
        handle = registry.add(config, domain, engine)
        return JSONResponse(status_code=201, content=handle.summary())

    @app.get("/runs")
    def list_runs():
        return {"runs": [h.summary() for h in registry.all()]}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        handle = registry.get(run_id)
        if handle is None:
            return _error(404, "not_found", f"unknown run: {run_id}")
        return handle.summary()

    @app.post("/runs/{run_id}/step")
    async def step_run(run_id: str, request: Request):
        handle = registry.get(run_id)
        if handle is None:
            return _error(404, "not_found", f"unknown run: {run_id}")
        body = await _json_body(request)
        if body is None:
            return _error(400, "validation", "body must be a JSON object")
        generations = body.get("generations")
        if isinstance(generations, bool) or not isinstance(generations, int):
            return _error(400, "validation", "generations must be an integer")
        if generations < 0:
            return _error(400, "validation", "generations must be non-negative")
        if not handle.lock.acquire(blocking=False):
            return _error(409, "conflict", "run is already stepping")
        try:
            await run_in_threadpool(_advance, handle, generations)
        finally:
            handle.lock.release()
        return {
            "run_id": run_id,
            "generation": handle.engine.generation,
            "evaluations": handle.engine.evaluations,
            "finished": handle.engine.initialized and handle.engine.finished,
        }

    @app.post("/runs/{run_id}/preferences")
    async def set_preference(run_id: str, request: Request):
        handle = registry.get(run_id)
        if handle is None:
            return _error(404, "not_found", f"unknown run: {run_id}")
        if not handle.supports_preferences:
            return _error(
                400,
                "unsupported",
                f"{handle.config.engine.algorithm} does not use a steerable grid archive",
            )
        body = await _json_body(request)
        if body is None:
            return _error(400, "validation", "body must be a JSON object")
        checked = _validate_preference(handle, body)
        if isinstance(checked, JSONResponse):
            return checked
        cell, weight = checked
        if handle.lock.acquire(blocking=False):
            # idle run: an iteration boundary, apply immediately
            try:
                handle.engine.set_preference(cell, weight)
            except ValueError as exc:
                return _error(400, "validation", str(exc))
            finally:
                handle.lock.release()
        else:
            with handle.pending_lock:
                handle.pending_preferences.append((cell, weight))
        return {"acknowledged": True, "cell": list(cell), "weight": weight}

    @app.get("/runs/{run_id}/archive")
    def get_archive(run_id: str, ax: str = "0,1"):
        handle = registry.get(run_id)
        if handle is None:
            return _error(404, "not_found", f"unknown run: {run_id}")
        try:
            parts = ax.split(",")
            if len(parts) != 2:
                raise ValueError("ax must be two comma-separated indices")
            axes = (int(parts[0]), int(parts[1]))
        except ValueError as exc:
            return _error(400, "validation", str(exc))
        # serve the boundary snapshot; refresh it only when no step holds
        # the lock, so pollers never observe a mid-iteration state
        if handle.lock.acquire(blocking=False):
            try:
                handle.refresh()
            finally:
                handle.lock.release()
        report = handle.report
        try:
            grid = heatmap_export(report, axes)
        except ValueError as exc:
            return _error(400, "validation", str(exc))
        heatmap = [[None if np.isnan(v) else float(v) for v in row] for row in grid]
        return {
            "run_id": run_id,
            "generation": report.generation,
            "evaluations": report.evaluations,
            "axes": list(axes),
            "resolution": list(report.resolution),
            "bounds": [list(b) for b in report.bounds],
            "descriptor_names": list(report.descriptor_names),
            "coverage": report.coverage,
            "qd_score": report.qd_score,
            "best_fitness": report.best_fitness,
            "heatmap": heatmap,
            "cells": [
                {
                    "cell": list(rec.cell),
                    "fitness": rec.fitness,
                    "individual_id": rec.individual_id,
                }
                for rec in report.cells
            ],
        }

    @app.get("/runs/{run_id}/individuals/{individual_id}")
    def get_individual(run_id: str, individual_id: int):
        handle = registry.get(run_id)
        if handle is None:
            return _error(404, "not_found", f"unknown run: {run_id}")
        ind = handle.engine.history.get(individual_id)
        if ind is None:
            return _error(404, "not_found", f"unknown individual: {individual_id}")
        closure = lineage_trace(individual_id, handle.engine.history)
        ev = ind.evaluation
        return {
            "run_id": run_id,
            "id": ind.id,
            "generation": ind.birth_generation,
            "operation": ind.variation,
            "parents": list(ind.parents),
            "genome_text": handle.domain.genome_to_text(ind.genome),
            "fitness": ev.fitness,
            "descriptor": [float(x) for x in ev.descriptor],
            "feasible": ev.feasible,
            "infeasibility": ev.infeasibility,
            "lineage": [closure[k].to_dict() for k in sorted(closure)],
        }

    @app.get("/runs/{run_id}/metrics")
    def get_metrics(run_id: str):
        handle = registry.get(run_id)
        if handle is None:
            return _error(404, "not_found", f"unknown run: {run_id}")
        return {
            "run_id": run_id,
            "generation": handle.engine.generation,
            "evaluations": handle.engine.evaluations,
            "finished": handle.engine.initialized and handle.engine.finished,
            "metrics": list(handle.engine.metrics),
            "selection_counts": handle.selection_counts
            if handle.supports_preferences
            else None,
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
