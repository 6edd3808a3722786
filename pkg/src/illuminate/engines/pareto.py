"""Non-dominated sorting, crowding distance and the tournament/truncation
selection built on them. Objectives are maximized.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "dominates",
    "non_dominated_ranks",
    "crowding_distances",
    "nsga_survivor_indices",
    "binary_tournament",
]


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """a dominates b: at least as good everywhere, strictly better once."""
    return bool(np.all(a >= b) and np.any(a > b))


def non_dominated_ranks(objectives: np.ndarray) -> np.ndarray:
    """Fast non-dominated sorting; rank 0 is the Pareto front."""
    objs = np.asarray(objectives, dtype=np.float64)
    n = objs.shape[0]
    ranks = np.full(n, -1, dtype=np.int64)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    domination_count = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(objs[i], objs[j]):
                dominated_by[i].append(j)
                domination_count[j] += 1
            elif dominates(objs[j], objs[i]):
                dominated_by[j].append(i)
                domination_count[i] += 1
    front = [i for i in range(n) if domination_count[i] == 0]
    rank = 0
    while front:
        nxt = []
        for i in front:
            ranks[i] = rank
            for j in dominated_by[i]:
                domination_count[j] -= 1
                if domination_count[j] == 0:
                    nxt.append(j)
        front = nxt
        rank += 1
    return ranks


def crowding_distances(objectives: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    """Per-front crowding distance; boundary points get infinity."""
    objs = np.asarray(objectives, dtype=np.float64)
    out = np.zeros(objs.shape[0], dtype=np.float64)
    for rank in np.unique(ranks):
        members = np.flatnonzero(ranks == rank)
        if members.size <= 2:
            out[members] = np.inf
            continue
        for m in range(objs.shape[1]):
            order = members[np.argsort(objs[members, m], kind="stable")]
            span = objs[order[-1], m] - objs[order[0], m]
            out[order[0]] = np.inf
            out[order[-1]] = np.inf
            if span <= 0:
                continue
            gaps = (objs[order[2:], m] - objs[order[:-2], m]) / span
            out[order[1:-1]] += gaps
    return out


def nsga_survivor_indices(objectives: np.ndarray, count: int) -> list[int]:
    """Environmental selection: whole fronts first, the straddling front
    truncated by crowding distance (ties keep the lower index)."""
    ranks = non_dominated_ranks(objectives)
    crowd = crowding_distances(objectives, ranks)
    order = sorted(range(len(ranks)), key=lambda i: (ranks[i], -crowd[i], i))
    return order[:count]


def binary_tournament(
    ranks: np.ndarray, crowding: np.ndarray, rng: np.random.Generator
) -> int:
    """Draw two contestants; lower rank wins, then higher crowding, then
    the first draw (deterministic for a given generator state)."""
    i, j = rng.integers(len(ranks), size=2)
    i, j = int(i), int(j)
    if (ranks[i], -crowding[i]) <= (ranks[j], -crowding[j]):
        return i
    return j
