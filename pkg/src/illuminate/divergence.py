"""Divergence scoring: k-nearest-neighbor novelty and prediction-deviation
surprise.

Novelty rewards being far from what the search has seen; surprise rewards
being far from where a short linear forecast said the search was heading.
Both operate on "distance vectors": flat float vectors compared under
either Euclidean distance or Hamming distance (count of unequal entries).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

__all__ = [
    "NoveltyArchive",
    "novelty_score",
    "novelty_scores",
    "archive_consider",
    "pairwise_distances",
    "SurpriseModel",
    "summarize_generation",
    "surprise_predict",
    "surprise_score",
    "surprise_scores",
]

EMPTY_REFERENCE_MSG = "novelty undefined for empty reference set"
INSUFFICIENT_HISTORY_MSG = "insufficient history"


@dataclass
class NoveltyArchive:
    """Grow-only store of distance vectors that were novel when seen.

    Fitness and the originating individual id ride along with each entry
    because local competition ranks against archive occupants too.
    """

    add_threshold: float = 0.05
    entries: list[np.ndarray] = field(default_factory=list)
    fitnesses: list[float] = field(default_factory=list)
    individual_ids: list[int] = field(default_factory=list)

    def add(self, vector: np.ndarray, fitness: float = 0.0, individual_id: int = -1):
        vec = np.asarray(vector, dtype=np.float64)
        vec.setflags(write=False)
        self.entries.append(vec)
        self.fitnesses.append(float(fitness))
        self.individual_ids.append(int(individual_id))

    def __len__(self) -> int:
        return len(self.entries)

    def as_array(self, dims: int) -> np.ndarray:
        if not self.entries:
            return np.empty((0, dims), dtype=np.float64)
        return np.vstack(self.entries)


def _metric_distances(subject: np.ndarray, refs: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        return np.sqrt(np.sum((refs - subject) ** 2, axis=1))
    if metric == "hamming":
        return np.count_nonzero(refs != subject, axis=1).astype(np.float64)
    raise ValueError(f"unknown metric {metric!r}")


def novelty_score(
    subject: np.ndarray,
    population: Sequence[np.ndarray],
    archive: Optional[NoveltyArchive] = None,
    k: int = 15,
    metric: str = "euclidean",
) -> float:
    """Mean distance from the subject to its k nearest references.

    The reference set is the population plus the archive entries, with a
    single instance equal to the subject removed when present (a subject
    normally sits inside the population it is scored against; identical
    twins still count). Fewer than k references means all of them are
    averaged. An empty reference set is an error.
    """
    subj = np.asarray(subject, dtype=np.float64)
    rows = [np.asarray(p, dtype=np.float64) for p in population]
    if archive is not None:
        rows.extend(archive.entries)
    if rows:
        refs = np.vstack(rows)
        self_rows = np.flatnonzero(np.all(refs == subj, axis=1))
        if self_rows.size:
            refs = np.delete(refs, self_rows[0], axis=0)
    else:
        refs = np.empty((0, subj.size))
    if refs.shape[0] == 0:
        raise ValueError(EMPTY_REFERENCE_MSG)
    dists = _metric_distances(subj, refs, metric)
    kk = min(k, dists.size)
    nearest = np.partition(dists, kk - 1)[:kk]
    return float(np.mean(nearest))


def pairwise_distances(
    subjects: np.ndarray, references: np.ndarray, metric: str
) -> np.ndarray:
    """Full (n_subjects, n_references) distance matrix.

    Hamming distances count unequal coordinates; they are computed from a
    one-hot agreement product so large reference sets stay in BLAS.
    """
    subs = np.asarray(subjects, dtype=np.float64)
    refs = np.asarray(references, dtype=np.float64)
    if metric == "euclidean":
        return cdist(subs, refs)
    if metric != "hamming":
        raise ValueError(f"unknown metric {metric!r}")
    values = np.unique(np.concatenate([subs.ravel(), refs.ravel()]))
    dims = subs.shape[1]
    if values.size > 32:
        # many distinct values: one-hot would not fit, compare directly
        out = np.empty((subs.shape[0], refs.shape[0]), dtype=np.float64)
        step = max(1, 2_000_000 // max(1, refs.shape[0] * dims))
        for start in range(0, subs.shape[0], step):
            block = subs[start : start + step, None, :] != refs[None, :, :]
            out[start : start + step] = block.sum(axis=2)
        return out
    ns, nr = subs.shape[0], refs.shape[0]
    sub_hot = np.zeros((ns, dims * values.size), dtype=np.float32)
    ref_hot = np.zeros((nr, dims * values.size), dtype=np.float32)
    sub_codes = np.searchsorted(values, subs)
    ref_codes = np.searchsorted(values, refs)
    col = np.arange(dims) * values.size
    rows = np.arange(ns)[:, None].repeat(dims, axis=1)
    sub_hot[rows.ravel(), (col + sub_codes).ravel()] = 1.0
    rows = np.arange(nr)[:, None].repeat(dims, axis=1)
    ref_hot[rows.ravel(), (col + ref_codes).ravel()] = 1.0
    agreements = sub_hot @ ref_hot.T
    return (dims - agreements).astype(np.float64)


def novelty_scores(
    subjects: np.ndarray,
    references: np.ndarray,
    k: int = 15,
    subjects_in_references: bool = True,
    metric: str = "euclidean",
) -> np.ndarray:
    """Vectorized novelty for many subjects against one reference set.

    Matches ``novelty_score`` exactly: when the subjects are members of
    the reference set, one zero-distance entry is discarded per subject.
    """
    subs = np.asarray(subjects, dtype=np.float64)
    refs = np.asarray(references, dtype=np.float64)
    if refs.shape[0] == 0 or (subjects_in_references and refs.shape[0] == 1):
        raise ValueError(EMPTY_REFERENCE_MSG)
    want = k + 1 if subjects_in_references else k
    want = min(want, refs.shape[0])
    if metric == "euclidean" and refs.shape[0] > 64:
        tree = cKDTree(refs)
        dists, _ = tree.query(subs, k=want)
        dists = np.atleast_2d(dists)
        if want == 1:
            dists = dists.reshape(len(subs), 1)
    else:
        full = pairwise_distances(subs, refs, metric)
        dists = np.sort(full, axis=1)[:, :want]
    out = np.empty(len(subs), dtype=np.float64)
    for i, row in enumerate(dists):
        if subjects_in_references:
            # drop one self-match; when none exists keep the k smallest
            row = row[1:] if row[0] == 0.0 else row[:-1]
        kk = min(k, row.size)
        out[i] = float(np.mean(row[:kk]))
    return out


def archive_consider(
    vector: np.ndarray,
    score: float,
    archive: NoveltyArchive,
    fitness: float = 0.0,
    individual_id: int = -1,
) -> bool:
    """Admit a vector whose novelty score clears the archive threshold."""
    if score > archive.add_threshold:
        archive.add(vector, fitness=fitness, individual_id=individual_id)
        return True
    return False


def summarize_generation(
    vectors: np.ndarray, m: int, rng: np.random.Generator, iterations: int = 30
) -> np.ndarray:
    """Compress a population into m k-means centroids.

    m clamps to the population size. Initialization is maximin (first
    centroid drawn by the generator, each next one the point farthest
    from the chosen set), which keeps well-separated clusters stable;
    Lloyd updates run until assignment fixpoint or the iteration cap.
    An emptied cluster keeps its previous centroid.
    """
    pts = np.asarray(vectors, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("population summary needs a non-empty (n, d) array")
    m = min(int(m), pts.shape[0])
    if m < 1:
        raise ValueError("need at least one centroid")
    chosen = [int(rng.integers(pts.shape[0]))]
    min_d = np.sum((pts - pts[chosen[0]]) ** 2, axis=1)
    while len(chosen) < m:
        nxt = int(np.argmax(min_d))
        chosen.append(nxt)
        min_d = np.minimum(min_d, np.sum((pts - pts[nxt]) ** 2, axis=1))
    centroids = pts[chosen].copy()
    assign = None
    for _ in range(iterations):
        d2 = cdist(pts, centroids, "sqeuclidean")
        new_assign = np.argmin(d2, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(m):
            members = pts[assign == j]
            if members.shape[0]:
                centroids[j] = members.mean(axis=0)
    return centroids


@dataclass
class SurpriseModel:
    """Rolling window of per-generation centroid summaries.

    Two summaries are enough for the linear forecast, so only the last
    ``window`` are retained.
    """

    centroids: int = 10
    window: int = 2
    history: list[np.ndarray] = field(default_factory=list)

    def observe(self, summary: np.ndarray):
        self.history.append(np.asarray(summary, dtype=np.float64))
        if len(self.history) > self.window:
            del self.history[: len(self.history) - self.window]

    @property
    def ready(self) -> bool:
        return len(self.history) >= 2


def _greedy_pairing(older: np.ndarray, newer: np.ndarray) -> list[tuple[int, int]]:
    """Match centroids across generations by repeatedly taking the
    globally closest remaining pair. Deterministic: ties resolve to the
    lowest flat index."""
    d = cdist(older, newer)
    pairs = []
    free_old = set(range(older.shape[0]))
    free_new = set(range(newer.shape[0]))
    masked = d.copy()
    while free_old and free_new:
        flat = int(np.argmin(masked))
        i, j = divmod(flat, masked.shape[1])
        pairs.append((i, j))
        free_old.discard(i)
        free_new.discard(j)
        masked[i, :] = np.inf
        masked[:, j] = np.inf
    return pairs


def surprise_predict(model: SurpriseModel) -> np.ndarray:
    """Two-point linear extrapolation of the centroid summaries.

    Centroids of the two stored generations are matched greedily by
    distance; each matched pair forecasts 2*current - previous. A current
    centroid left unmatched (summaries can shrink when a population
    does) predicts itself. Rows align with the newest summary.
    """
    if not model.ready:
        raise ValueError(INSUFFICIENT_HISTORY_MSG)
    older, newer = model.history[-2], model.history[-1]
    predicted = newer.copy()
    for i, j in _greedy_pairing(older, newer):
        predicted[j] = 2.0 * newer[j] - older[i]
    return predicted


def surprise_score(subject: np.ndarray, predicted: np.ndarray) -> float:
    """Euclidean distance from the subject to the nearest predicted
    centroid: deviation from where the population was forecast to be."""
    subj = np.asarray(subject, dtype=np.float64)
    preds = np.asarray(predicted, dtype=np.float64)
    if preds.ndim != 2 or preds.shape[0] == 0:
        raise ValueError("prediction set must be a non-empty (m, d) array")
    return float(np.min(np.sqrt(np.sum((preds - subj) ** 2, axis=1))))


def surprise_scores(subjects: np.ndarray, predicted: np.ndarray) -> np.ndarray:
    """Vectorized ``surprise_score`` over many subjects."""
    subs = np.asarray(subjects, dtype=np.float64)
    preds = np.asarray(predicted, dtype=np.float64)
    return np.min(cdist(subs, preds), axis=1)
