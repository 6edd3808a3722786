"""Core contracts: evaluation records, lineage bookkeeping, rng streams,
and batch evaluation."""
from __future__ import annotations

import numpy as np
import pytest

from illuminate.core import (
    Evaluation,
    Individual,
    MalformedGenomeError,
    child_genome,
    evaluate_batch,
    rng_stream,
    spawn_offspring,
)

from conftest import FloatDomain, RiggedFeasibilityDomain


def _ind(iid, genome, domain, parents=(), gen=0):
    return Individual(
        id=iid,
        genome=genome,
        evaluation=domain.evaluate(genome),
        parents=parents,
        birth_generation=gen,
    )


def test_evaluation_feasible_iff_zero_infeasibility():
    ev = Evaluation(fitness=0.3, descriptor=np.array([0.1]), feasible=True, infeasibility=0.0)
    assert ev.feasible and ev.infeasibility == 0.0
    with pytest.raises(ValueError):
        Evaluation(fitness=0.3, descriptor=np.array([0.1]), feasible=True, infeasibility=0.2)
    with pytest.raises(ValueError):
        Evaluation(fitness=0.3, descriptor=np.array([0.1]), feasible=False, infeasibility=0.0)


def test_evaluation_rejects_out_of_range_fitness():
    with pytest.raises(ValueError):
        Evaluation(fitness=1.5, descriptor=np.array([0.1]), feasible=True, infeasibility=0.0)
    with pytest.raises(ValueError):
        Evaluation(fitness=float("nan"), descriptor=np.array([0.1]), feasible=True, infeasibility=0.0)


def test_individual_parent_arity():
    dom = FloatDomain()
    assert _ind(0, 0.5, dom).variation == "seed"
    assert _ind(1, 0.5, dom, parents=(0,)).variation == "mutation"
    assert _ind(2, 0.5, dom, parents=(0, 1)).variation == "crossover"
    with pytest.raises(ValueError):
        _ind(3, 0.5, dom, parents=(0, 1, 2))


def test_rng_stream_label_independence():
    a1 = rng_stream(42, "selection").uniform(size=5)
    a2 = rng_stream(42, "selection").uniform(size=5)
    b = rng_stream(42, "variation").uniform(size=5)
    c = rng_stream(43, "selection").uniform(size=5)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    assert not np.array_equal(a1, c)


def test_spawn_offspring_lineage_and_determinism():
    dom = FloatDomain()
    p7 = _ind(7, 0.4, dom)
    p9 = _ind(9, 0.8, dom)

    child = spawn_offspring(dom, p7, None, rng_stream(1, "v"), child_id=10, generation=3)
    assert child.parents == (7,)
    assert child.birth_generation == 3

    xchild = spawn_offspring(dom, p7, p9, rng_stream(1, "v"), child_id=11, generation=3)
    assert xchild.parents == (7, 9)

    g1 = child_genome(dom, p7, p9, rng_stream(5, "v"))
    g2 = child_genome(dom, p7, p9, rng_stream(5, "v"))
    assert g1 == g2


def test_evaluate_deterministic():
    dom = RiggedFeasibilityDomain()
    for g in (0.1, 0.5, 0.9):
        e1, e2 = dom.evaluate(g), dom.evaluate(g)
        assert e1.fitness == e2.fitness
        assert np.array_equal(e1.descriptor, e2.descriptor)
        assert e1.feasible == e2.feasible
        assert e1.infeasibility == e2.infeasibility


def test_evaluate_batch_matches_serial(monkeypatch):
    dom = FloatDomain()
    genomes = [0.1, 0.2, 0.7, 0.9]
    serial = evaluate_batch(dom, genomes)
    monkeypatch.setenv("ILLUMINATE_THREADS", "4")
    parallel = evaluate_batch(dom, genomes)
    assert [e.fitness for e in serial] == [e.fitness for e in parallel]
    assert all(np.array_equal(a.descriptor, b.descriptor) for a, b in zip(serial, parallel))


def test_malformed_genome_error():
    dom = FloatDomain()
    with pytest.raises(MalformedGenomeError):
        dom.evaluate(float("inf"))
