"""Expressivity reports, heatmap projection, lineage queries."""
import numpy as np
import pytest
from conftest import FloatDomain

from illuminate.analysis import (
    CellRecord,
    ExpressivityReport,
    common_ancestors,
    heatmap_export,
    lineage_trace,
    snapshot,
)
from illuminate.core import Evaluation, Individual
from illuminate.engines import EngineConfig, create_engine


def make_individual(iid, fitness, descriptor, parents=(), generation=0):
    return Individual(
        id=iid,
        genome=None,
        evaluation=Evaluation(fitness, np.asarray(descriptor), True, 0.0),
        parents=parents,
        birth_generation=generation,
    )


def make_report(cells, resolution=(4, 4), **overrides):
    records = tuple(
        CellRecord(cell=c, fitness=f, individual_id=i)
        for i, (c, f) in enumerate(sorted(cells.items()))
    )
    counts = [[0] * r for r in resolution]
    for rec in records:
        for d, k in enumerate(rec.cell):
            counts[d][k] += 1
    fields = dict(
        generation=1,
        evaluations=10,
        resolution=resolution,
        bounds=tuple((0.0, 1.0) for _ in resolution),
        descriptor_names=tuple(f"d{i}" for i in range(len(resolution))),
        coverage=len(records) / int(np.prod(resolution)),
        qd_score=float(sum(r.fitness for r in records)),
        best_fitness=max((r.fitness for r in records), default=0.0),
        cells=records,
        histograms=tuple(tuple(c) for c in counts),
    )
    fields.update(overrides)
    return ExpressivityReport(**fields)


def engine_with_cells(placements, resolution=(16, 16)):
    eng = create_engine(
        FloatDomain(),
        EngineConfig("ME", budget=10_000, init_count=10, grid_resolution=resolution),
        seed=0,
    )
    for iid, (descriptor, fitness) in enumerate(placements):
        eng.map.place(make_individual(iid, fitness, descriptor))
    return eng


# --- snapshots -----------------------------------------------------------------


def test_empty_archive_snapshot():
    eng = create_engine(
        FloatDomain(), EngineConfig("ME", budget=100, init_count=10), seed=0
    )
    report = snapshot(eng)
    assert report.coverage == 0.0
    assert report.qd_score == 0.0
    assert report.best_fitness == 0.0
    assert report.cells == ()
    assert report.filled_cells == 0


def test_snapshot_counts_100_of_256():
    placements = []
    k = 0
    for i in range(16):
        for j in range(16):
            if k >= 100:
                break
            placements.append((((i + 0.5) / 16, (j + 0.5) / 16), 1.0))
            k += 1
    eng = engine_with_cells(placements)
    report = snapshot(eng)
    assert report.filled_cells == 100
    assert report.total_cells == 256
    assert report.coverage == pytest.approx(100 / 256)
    assert report.qd_score == pytest.approx(100.0)
    assert report.best_fitness == 1.0


def test_snapshot_sums_fitness_over_cells():
    placements = [
        (((i + 0.5) / 4, (j + 0.5) / 4), 1.0) for i in range(4) for j in range(4)
    ]
    eng = engine_with_cells(placements, resolution=(4, 4))
    report = snapshot(eng)
    assert report.qd_score == pytest.approx(16.0)
    assert report.coverage == 1.0
    # histogram: every row index and column index holds 4 elites
    assert report.histograms == ((4, 4, 4, 4), (4, 4, 4, 4))


def test_snapshot_is_read_only():
    eng = create_engine(
        FloatDomain(), EngineConfig("ME", budget=200, init_count=50), seed=1
    )
    eng.run()
    cells_before = dict(eng.map.cells)
    counters = (eng.map.placements, eng.map.replacements, eng.map.rejections)
    metrics_len = len(eng.metrics)
    report = snapshot(eng)
    assert report.filled_cells == len(cells_before)
    assert eng.map.cells == cells_before
    assert (eng.map.placements, eng.map.replacements, eng.map.rejections) == counters
    assert len(eng.metrics) == metrics_len


def test_snapshot_qd_never_decreases_during_run():
    eng = create_engine(
        FloatDomain(), EngineConfig("ME", budget=400, init_count=50), seed=2
    )
    scores = []
    eng.run(lambda e: scores.append(snapshot(e).qd_score))
    assert all(b >= a for a, b in zip(scores, scores[1:]))


def test_report_dict_round_trip_fields():
    report = make_report({(0, 0): 0.5, (1, 2): 0.75})
    data = report.to_dict()
    assert data["filled_cells"] == 2
    assert data["total_cells"] == 16
    assert data["cells"][0] == {"cell": [0, 0], "fitness": 0.5, "individual_id": 0}
    assert data["histograms"] == [[1, 1, 0, 0], [1, 0, 1, 0]]


# --- heatmaps ------------------------------------------------------------------


def test_heatmap_identity_for_two_dims():
    report = make_report({(0, 0): 0.2, (1, 3): 0.9, (3, 2): 0.4})
    grid = heatmap_export(report, (0, 1))
    assert grid.shape == (4, 4)
    assert grid[0, 0] == 0.2
    assert grid[1, 3] == 0.9
    assert grid[3, 2] == 0.4
    assert np.isnan(grid).sum() == 13


def test_heatmap_swapped_axes_transposes():
    report = make_report({(1, 3): 0.9})
    np.testing.assert_array_equal(
        heatmap_export(report, (1, 0)), heatmap_export(report, (0, 1)).T
    )


def test_heatmap_marginalizes_by_max():
    cells = {
        (0, 1, 0): 0.3,
        (0, 1, 1): 0.8,  # same (d0, d1) fiber: max wins
        (0, 1, 2): 0.5,
        (2, 2, 1): 0.6,
    }
    report = make_report(cells, resolution=(3, 3, 3))
    grid = heatmap_export(report, (0, 1))
    assert grid[0, 1] == pytest.approx(0.8)
    assert grid[2, 2] == pytest.approx(0.6)
    assert np.isnan(grid).sum() == 7

    # brute-force fiber scan over the third axis must agree everywhere
    for i in range(3):
        for j in range(3):
            fiber = [f for c, f in cells.items() if c[0] == i and c[1] == j]
            if fiber:
                assert grid[i, j] == pytest.approx(max(fiber))
            else:
                assert np.isnan(grid[i, j])


def test_heatmap_of_empty_report_is_all_nan():
    report = make_report({})
    assert np.isnan(heatmap_export(report, (0, 1))).all()


def test_heatmap_axis_validation():
    report = make_report({(0, 0): 0.5})
    with pytest.raises(ValueError, match="distinct"):
        heatmap_export(report, (1, 1))
    with pytest.raises(ValueError, match="out of range"):
        heatmap_export(report, (0, 2))
    flat = make_report({(1,): 0.5}, resolution=(4,))
    with pytest.raises(ValueError, match="at least two"):
        heatmap_export(flat, (0, 1))


# --- lineage -------------------------------------------------------------------


def seed_history():
    h = {}
    h[0] = make_individual(0, 0.1, (0.5, 0.5))
    h[1] = make_individual(1, 0.3, (0.4, 0.6), parents=(0,), generation=1)
    h[2] = make_individual(2, 0.5, (0.6, 0.4), parents=(0,), generation=1)
    h[3] = make_individual(3, 0.7, (0.5, 0.4), parents=(1, 2), generation=2)
    h[4] = make_individual(4, 0.2, (0.9, 0.9))
    return h


def test_seed_trace_is_single_node():
    trace = lineage_trace(0, seed_history())
    assert set(trace) == {0}
    node = trace[0]
    assert node.operation == "seed"
    assert node.parents == ()
    assert node.generation == 0


def test_mutation_chain_trace():
    trace = lineage_trace(1, seed_history())
    assert set(trace) == {0, 1}
    assert trace[1].operation == "mutation"
    assert trace[1].parents == (0,)


def test_crossover_closure_contains_both_sides():
    trace = lineage_trace(3, seed_history())
    assert set(trace) == {0, 1, 2, 3}
    assert trace[3].operation == "crossover"
    assert trace[3].parents == (1, 2)
    assert trace[3].to_dict()["parents"] == [1, 2]


def test_common_ancestor_of_siblings():
    history = seed_history()
    assert common_ancestors((1, 2), history) == (0,)
    assert common_ancestors((3,), history) == (0, 1, 2, 3)
    assert common_ancestors((1, 4), history) == ()
    # an individual is its own ancestor
    assert common_ancestors((0, 1), history) == (0,)


def test_lineage_rejects_unknown_ids():
    with pytest.raises(ValueError, match="unknown individual id"):
        lineage_trace(99, seed_history())
    with pytest.raises(ValueError, match="at least one"):
        common_ancestors((), seed_history())


def test_engine_history_traces_to_seeds():
    eng = create_engine(
        FloatDomain(), EngineConfig("ME", budget=150, init_count=30), seed=5
    )
    eng.run()
    last_id = max(eng.history)
    trace = lineage_trace(last_id, eng.history)
    roots = [n for n in trace.values() if n.operation == "seed"]
    assert roots, "every lineage must bottom out at generation-0 seeds"
    assert all(n.generation == 0 for n in roots)
    for node in trace.values():
        for p in node.parents:
            assert p in trace
