"""Acceptance gate.

Each test prints one PASS/FAIL line for its criterion (run with -s to
see them on a green suite) and then asserts, so the whole gate also
fails loudly under plain pytest. The trend experiment prints its raw
per-seed table before any assertion.
"""
from __future__ import annotations

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.ndimage import label

from illuminate.config import build_run, parse_run_config
from illuminate.core import Evaluation, Individual
from illuminate.divergence import NoveltyArchive, SurpriseModel, novelty_score, surprise_predict
from illuminate.domains import DeceptiveDomain
from illuminate.domains.levels import EXIT, START, TREASURE, WALL
from illuminate.engines import EngineConfig, create_engine
from illuminate.engines.pareto import non_dominated_ranks
from illuminate.partition import (
    GridSpec,
    cell_of_sliding,
    cell_of_uniform,
    recompute_boundaries,
)


def verdict(name: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return ok


def run_engine(domain_cfg, engine_cfg, seed):
    config = parse_run_config(
        {"domain": domain_cfg, "engine": engine_cfg, "seed": seed}
    )
    domain, engine = build_run(config)
    return domain, engine


# --- criterion 1: novelty oracle ---------------------------------------------


def test_novelty_oracle():
    rng = np.random.default_rng(90210)
    start = time.perf_counter()
    worst = 0.0
    for trial in range(1000):
        dims = 2 if trial % 2 == 0 else 5
        k = 1 if trial % 4 < 2 else 15
        n = int(rng.integers(2, 40))
        population = rng.uniform(-5.0, 5.0, size=(n, dims))
        archive = None
        archive_rows = np.empty((0, dims))
        if trial % 3 == 0:
            archive = NoveltyArchive()
            archive_rows = rng.uniform(-5.0, 5.0, size=(int(rng.integers(1, 25)), dims))
            for row in archive_rows:
                archive.add(row)

        refs_full = np.vstack([population, archive_rows])
        for i in range(n):
            got = novelty_score(population[i], list(population), archive=archive, k=k)
            dists = np.linalg.norm(refs_full - population[i], axis=1)
            self_rows = np.flatnonzero(np.all(refs_full == population[i], axis=1))
            dists = np.delete(dists, self_rows[0])
            kk = min(k, dists.size)
            expected = float(np.mean(np.sort(dists)[:kk]))
            worst = max(worst, abs(got - expected))
    elapsed = time.perf_counter() - start

    ok = worst <= 1e-9 and elapsed < 10.0
    assert verdict(
        "novelty-oracle",
        ok,
        f"max abs error {worst:.2e} over 1000 sets, {elapsed:.1f}s",
    )


# --- criterion 2: partition correctness --------------------------------------


def test_partition_correctness():
    spec = GridSpec.uniform(((0.0, 1.0), (0.0, 2.0)), (4, 5))
    edge_ok = (
        cell_of_uniform(np.array([0.0, 0.0]), spec) == (0, 0)
        and cell_of_uniform(np.array([1.0, 2.0]), spec) == (3, 4)
        and cell_of_uniform(np.array([0.30, 1.48]), spec) == (1, 3)
        and cell_of_uniform(np.array([-0.5, 2.7]), spec) == (0, 4)
    )

    rng = np.random.default_rng(417)
    mismatches = 0
    for _ in range(500):
        n = int(rng.integers(5, 300))
        dims = int(rng.integers(1, 4))
        resolution = tuple(int(r) for r in rng.integers(2, 12, size=dims))
        if rng.random() < 0.3:
            buffer = np.round(rng.uniform(0, 1, size=(n, dims)), 1)
        else:
            buffer = rng.normal(0.0, 3.0, size=(n, dims))
        sliding = GridSpec.sliding(((-100.0, 100.0),) * dims, resolution)
        boundaries = recompute_boundaries(buffer, sliding)

        oracle_edges = []
        for d, r in zip(range(dims), resolution):
            vals = np.sort(buffer[:, d])
            ranks = [math.ceil(j * n / r) for j in range(1, r)]
            oracle_edges.append(np.array([vals[rank - 1] for rank in ranks]))
        for got, want in zip(boundaries.edges, oracle_edges):
            if not np.array_equal(got, want):
                mismatches += 1

        probes = np.vstack([buffer, rng.normal(0.0, 3.0, size=(20, dims))])
        for p in probes:
            got_cell = cell_of_sliding(p, boundaries)
            want_cell = tuple(
                int(np.searchsorted(oracle_edges[d], p[d], side="left"))
                for d in range(dims)
            )
            if got_cell != want_cell:
                mismatches += 1

    domain_cfg = {"name": "deceptive"}
    engine_cfg = {
        "algorithm": "MESB",
        "budget": 10_000,
        "init_count": 100,
        "batch_size": 100,
        "grid_resolution": [20, 20],
        "sliding_interval": 500,
    }
    _, engine = run_engine(domain_cfg, engine_cfg, seed=1)
    refits = 0
    imbalance = 0
    last_epoch = engine.boundary_epoch
    while not engine.finished:
        engine.step(1)
        if engine.boundary_epoch == last_epoch:
            continue
        last_epoch = engine.boundary_epoch
        refits += 1
        buffer = np.vstack(engine.descriptor_buffer)
        b = buffer.shape[0]
        for d, r in enumerate(engine.grid_spec.resolution):
            col = buffer[:, d]
            if np.unique(col).size != col.size:
                continue  # slack bound only guaranteed for distinct values
            bins = np.searchsorted(engine.map.boundaries.edges[d], col, side="left")
            counts = np.bincount(bins, minlength=r)
            slack = math.ceil(b / r) - math.floor(b / r) + 1
            if counts.max() - counts.min() > slack:
                imbalance += 1

    ok = edge_ok and mismatches == 0 and refits >= 10 and imbalance == 0
    assert verdict(
        "partition-correctness",
        ok,
        f"uniform edges {'ok' if edge_ok else 'BAD'}, "
        f"{mismatches} oracle mismatches over 500 buffers, "
        f"{refits} refits checked, {imbalance} balance violations",
    )


# --- criterion 3: elitism monotonicity ----------------------------------------


def test_elitism_monotonicity():
    start = time.perf_counter()
    engine_cfgs = {
        "ME": {},
        "ME-NOV": {},
        "MESB": {"sliding_interval": 1000},
        "CME": {},
    }
    violations = 0
    checks = 0
    for algo, extra in engine_cfgs.items():
        for seed in range(1, 6):
            cfg = {
                "algorithm": algo,
                "budget": 10_000,
                "init_count": 100,
                "batch_size": 100,
                "grid_resolution": [20, 20],
                **extra,
            }
            _, engine = run_engine({"name": "deceptive"}, cfg, seed)
            state = {"best": {}, "epoch": getattr(engine, "boundary_epoch", 0)}

            def watch(eng, state=state):
                nonlocal violations, checks
                epoch = getattr(eng, "boundary_epoch", 0)
                if epoch != state["epoch"]:
                    state["epoch"] = epoch
                    state["best"] = {}
                _, cells = eng.map_view()
                for cell, ind in cells.items():
                    prev = state["best"].get(cell)
                    if prev is not None:
                        checks += 1
                        if ind.fitness < prev:
                            violations += 1
                    state["best"][cell] = ind.fitness

            engine.run(callback=watch)
    elapsed = time.perf_counter() - start

    ok = violations == 0 and elapsed < 120.0
    assert verdict(
        "elitism-monotonicity",
        ok,
        f"{violations} decreases over {checks} cell comparisons "
        f"(ME/ME-NOV/MESB/CME, 5 seeds each), {elapsed:.1f}s",
    )


# --- criterion 4: feasibility purity ------------------------------------------

CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def flood_fill_feasible(grid: np.ndarray) -> bool:
    open_mask = grid != WALL
    components, _ = label(open_mask, structure=CROSS)
    start_pos = np.argwhere(grid == START)
    required = np.argwhere((grid == EXIT) | (grid == TREASURE))
    start_component = components[tuple(start_pos[0])]
    return all(components[tuple(pos)] == start_component for pos in required)


def labeled_individuals(engine):
    if hasattr(engine, "pops"):
        yield from engine.pops.feasible
        yield from engine.pops.infeasible
        yield from getattr(engine, "archived", {}).values()
    else:
        for pools in engine.map.cells.values():
            yield from pools.feasible
            yield from pools.infeasible


def test_feasibility_purity():
    engine_cfgs = {
        "CNS-FINS": {"population_size": 100},
        "CSS": {"population_size": 100},
        "CME": {"grid_resolution": [6, 6, 6]},
    }
    violations = 0
    checked = 0
    for algo, extra in engine_cfgs.items():
        for seed in range(1, 6):
            cfg = {
                "algorithm": algo,
                "budget": 10_000,
                "init_count": 100,
                "batch_size": 100,
                **extra,
            }
            _, engine = run_engine({"name": "tile_level"}, cfg, seed)
            engine.run()
            for ind in labeled_individuals(engine):
                checked += 1
                if flood_fill_feasible(ind.genome) != ind.evaluation.feasible:
                    violations += 1

    ok = violations == 0 and checked > 0
    assert verdict(
        "feasibility-purity",
        ok,
        f"{violations} label mismatches against the flood-fill oracle "
        f"over {checked} archived individuals (CNS/CSS/CME, 5 seeds x 10k)",
    )


# --- criterion 5: surprise extrapolation --------------------------------------


def test_surprise_extrapolation():
    rng = np.random.default_rng(555)
    exact = 0
    for trial in range(100):
        dims = int(rng.integers(2, 7))
        m = int(rng.integers(1, 9))
        older = rng.uniform(-0.1, 0.1, size=(m, dims))
        older[:, 0] += np.arange(m, dtype=np.float64)  # forces identity pairing
        newer = older + rng.uniform(-0.1, 0.1, size=(m, dims))
        extra = np.zeros((0, dims))
        if trial % 4 == 0:
            extra = rng.uniform(-0.1, 0.1, size=(2, dims))
            extra[:, 0] += 1000.0 + np.arange(2)

        model = SurpriseModel()
        model.observe(older)
        model.observe(np.vstack([newer, extra]) if extra.size else newer)
        predicted = surprise_predict(model)

        expected = np.vstack([2.0 * newer - older, extra]) if extra.size else 2.0 * newer - older
        if predicted.shape == expected.shape and np.array_equal(predicted, expected):
            exact += 1

    def css_modes(budget):
        cfg = {
            "algorithm": "CSS",
            "budget": budget,
            "init_count": 100,
            "batch_size": 100,
            "population_size": 100,
        }
        _, engine = run_engine({"name": "tile_level"}, cfg, seed=3)
        engine.run()
        return [row["selection_mode"] for row in engine.metrics]

    short = css_modes(300)  # exactly 2 generations
    longer = css_modes(500)  # 4 generations
    cold_ok = (
        short == ["uniform", "uniform"]
        and longer[:2] == ["uniform", "uniform"]
        and all(mode == "surprise" for mode in longer[2:])
    )

    ok = exact == 100 and cold_ok
    assert verdict(
        "surprise-extrapolation",
        ok,
        f"{exact}/100 fixtures bitwise equal to 2h1-h0, "
        f"cold-start modes short={short} long={longer}",
    )


# --- criterion 6: pareto oracle -----------------------------------------------


def peel_ranks(objectives: np.ndarray) -> np.ndarray:
    n = objectives.shape[0]
    ranks = np.full(n, -1, dtype=int)
    remaining = set(range(n))
    front = 0
    while remaining:
        members = []
        for i in remaining:
            dominated = any(
                np.all(objectives[j] >= objectives[i])
                and np.any(objectives[j] > objectives[i])
                for j in remaining
                if j != i
            )
            if not dominated:
                members.append(i)
        for i in members:
            ranks[i] = front
            remaining.discard(i)
        front += 1
    return ranks


def test_pareto_oracle():
    rng = np.random.default_rng(2718)
    agree = 0
    for trial in range(200):
        n = int(rng.integers(2, 51))
        objectives = rng.uniform(0.0, 1.0, size=(n, 2))
        if trial % 3 == 0:
            objectives = np.round(objectives, 1)  # force ties and duplicates
        if np.array_equal(non_dominated_ranks(objectives), peel_ranks(objectives)):
            agree += 1
    ok = agree == 200
    assert verdict(
        "pareto-oracle", ok, f"{agree}/200 populations match exhaustive peeling"
    )


# --- criterion 7: reproducibility ---------------------------------------------

REPRO_CONFIGS = {
    "ME": ({"name": "deceptive", "dims": 4}, {"grid_resolution": [8, 8]}),
    "ME-NOV": ({"name": "deceptive", "dims": 4}, {"grid_resolution": [8, 8]}),
    "MESB": ({"name": "deceptive", "dims": 4}, {"grid_resolution": [8, 8]}),
    "CME": ({"name": "tile_level"}, {"grid_resolution": [6, 6, 6]}),
    "CNS-FINS": ({"name": "tile_level"}, {"population_size": 50}),
    "CNS-FI2NS": ({"name": "tile_level"}, {"population_size": 50}),
    "CSS": ({"name": "tile_level"}, {"population_size": 50}),
    "NS-LC": ({"name": "deceptive", "dims": 4}, {"population_size": 50}),
    "SS-LC": ({"name": "deceptive", "dims": 4}, {"population_size": 50}),
    "GA": ({"name": "deceptive", "dims": 4}, {"population_size": 50}),
}


def test_reproducibility(tmp_path):
    differing = []
    for algo, (domain_cfg, extra) in REPRO_CONFIGS.items():
        config = {
            "domain": domain_cfg,
            "engine": {
                "algorithm": algo,
                "budget": 300,
                "init_count": 50,
                "batch_size": 25,
                **extra,
            },
            "seed": 12,
        }
        cfg_path = tmp_path / f"{algo}.json"
        cfg_path.write_text(json.dumps(config))
        dumps = []
        for attempt in ("a", "b"):
            out = tmp_path / f"{algo}_{attempt}"
            proc = subprocess.run(
                [
                    sys.executable,
                    "-m",
                    "illuminate.cli",
                    "run",
                    "--config",
                    str(cfg_path),
                    "--out",
                    str(out),
                    "--no-figures",
                ],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0, f"{algo}: {proc.stderr}"
            dumps.append(
                tuple(
                    (out / name).read_bytes()
                    for name in ("archive.jsonl", "metrics.jsonl", "lineage.jsonl")
                )
            )
        if dumps[0] != dumps[1]:
            differing.append(algo)

    ok = not differing
    assert verdict(
        "reproducibility",
        ok,
        "byte-identical archive dumps across two process invocations "
        f"for all 10 engines" if ok else f"differs for {differing}",
    )


# --- criterion 8: trend experiment --------------------------------------------


def test_trend_experiment():
    start = time.perf_counter()
    engine_cfgs = {
        "ME": {"grid_resolution": [20, 20]},
        "CME": {"grid_resolution": [20, 20]},
        "GA": {"population_size": 100},
    }
    rows = []
    for algo, extra in engine_cfgs.items():
        for seed in range(1, 11):
            cfg = {
                "algorithm": algo,
                "budget": 20_000,
                "init_count": 100,
                "batch_size": 100,
                **extra,
            }
            _, engine = run_engine({"name": "deceptive"}, cfg, seed)
            engine.run()
            rows.append(
                {
                    "algorithm": algo,
                    "seed": seed,
                    "coverage": engine.coverage(),
                    "best_fitness": engine.best_fitness,
                    "crossed": engine.best_fitness >= 0.9,
                }
            )
    elapsed = time.perf_counter() - start

    print()
    print(f"{'algorithm':<10} {'seed':>4} {'coverage':>9} {'best':>7} {'crossed':>8}")
    for row in rows:
        print(
            f"{row['algorithm']:<10} {row['seed']:>4} {row['coverage']:>9.4f} "
            f"{row['best_fitness']:>7.4f} {str(row['crossed']):>8}"
        )
    stats = {}
    for algo in engine_cfgs:
        algo_rows = [r for r in rows if r["algorithm"] == algo]
        stats[algo] = {
            "median_cov": float(np.median([r["coverage"] for r in algo_rows])),
            "crossings": sum(r["crossed"] for r in algo_rows),
        }
    for algo, s in stats.items():
        print(f"{algo:<10} median coverage {s['median_cov']:.4f}, moat crossings {s['crossings']}/10")

    coverage_ok = (
        stats["ME"]["median_cov"] >= stats["GA"]["median_cov"]
        and stats["CME"]["median_cov"] >= stats["GA"]["median_cov"]
    )
    crossing_ok = any(
        stats[qd]["crossings"] >= 5 and stats["GA"]["crossings"] < stats[qd]["crossings"]
        for qd in ("ME", "CME")
    )
    ok = coverage_ok and crossing_ok and elapsed < 600.0
    assert verdict(
        "trend-experiment",
        ok,
        f"median coverage ME {stats['ME']['median_cov']:.3f} / CME "
        f"{stats['CME']['median_cov']:.3f} vs GA {stats['GA']['median_cov']:.3f}; "
        f"crossings ME {stats['ME']['crossings']} / CME {stats['CME']['crossings']} "
        f"vs GA {stats['GA']['crossings']}; {elapsed:.0f}s",
    )


# --- criterion 9: steering statistics ------------------------------------------


def test_steering_statistics():
    domain = DeceptiveDomain(dims=4)
    config = EngineConfig(
        algorithm="ME", budget=1000, grid_resolution=(4, 4)
    )
    engine = create_engine(domain, config, seed=77)

    for iid, descriptor in ((0, (0.1, 0.1)), (1, (0.9, 0.9))):
        ev = Evaluation(
            fitness=0.5,
            descriptor=np.asarray(descriptor, dtype=np.float64),
            feasible=True,
            infeasibility=0.0,
        )
        engine.map.place(Individual(id=iid, genome=None, evaluation=ev))
    assert sorted(engine.map.cells) == [(0, 0), (3, 3)]
    engine.set_preference((3, 3), 3.0)

    draws = 10_000
    for _ in range(draws):
        engine.select_parent_cell()
    favored = engine.selection_counts.get((3, 3), 0) / draws
    plain = engine.selection_counts.get((0, 0), 0) / draws
    se = math.sqrt(0.25 * 0.75 / draws)

    ok = abs(favored - 0.75) <= 3 * se and abs(plain - 0.25) <= 3 * se
    assert verdict(
        "steering-statistics",
        ok,
        f"frequencies {plain:.4f}/{favored:.4f} vs 0.25/0.75, "
        f"tolerance 3*SE = {3 * se:.4f} over {draws} events",
    )
