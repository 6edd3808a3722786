"""Behavior-space partitioning: uniform grids, binary feature maps and
percentile-driven sliding boundaries.

Cell indices are plain tuples of ints so they can key dictionaries and
serialize as JSON lists without conversion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence

import numpy as np

__all__ = [
    "GridKind",
    "GridSpec",
    "BoundarySet",
    "cell_of_uniform",
    "binary_flags",
    "cell_of_binary",
    "recompute_boundaries",
    "cell_of_sliding",
    "cell_of",
]

GridKind = Literal["uniform", "binary", "sliding"]

CellIndex = tuple[int, ...]


@dataclass(frozen=True)
class GridSpec:
    """Shape of a partitioned behavior space.

    ``bounds`` gives per-dimension (low, high); ``resolution`` the bin
    count per dimension. Binary grids are fixed at two bins per dimension
    over a unit interval; sliding grids reuse the uniform geometry but
    their bin edges come from a ``BoundarySet``.
    """

    kind: GridKind
    bounds: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("uniform", "binary", "sliding"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if len(self.bounds) != len(self.resolution):
            raise ValueError("bounds and resolution must have equal length")
        if len(self.bounds) == 0:
            raise ValueError("grid needs at least one dimension")
        for lo, hi in self.bounds:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"invalid bounds ({lo}, {hi})")
        for r in self.resolution:
            if r < 1:
                raise ValueError("resolution must be at least 1 per dimension")
        if self.kind == "binary" and any(r != 2 for r in self.resolution):
            raise ValueError("binary grids have exactly two bins per dimension")

    @property
    def dims(self) -> int:
        return len(self.resolution)

    @property
    def total_cells(self) -> int:
        return int(np.prod(self.resolution, dtype=np.int64))

    @classmethod
    def uniform(
        cls, bounds: Sequence[tuple[float, float]], resolution: Sequence[int]
    ) -> "GridSpec":
        return cls("uniform", tuple(map(tuple, bounds)), tuple(resolution))

    @classmethod
    def binary(cls, dims: int) -> "GridSpec":
        return cls("binary", tuple((0.0, 1.0) for _ in range(dims)), (2,) * dims)

    @classmethod
    def sliding(
        cls, bounds: Sequence[tuple[float, float]], resolution: Sequence[int]
    ) -> "GridSpec":
        return cls("sliding", tuple(map(tuple, bounds)), tuple(resolution))


@dataclass(frozen=True)
class BoundarySet:
    """Per-dimension sorted interior bin edges for a sliding grid.

    Dimension i with resolution R_i carries exactly R_i - 1 edges.
    """

    edges: tuple[np.ndarray, ...]

    def __post_init__(self):
        for dim_edges in self.edges:
            if np.any(np.diff(dim_edges) < 0):
                raise ValueError("boundaries must be non-decreasing")

    @property
    def dims(self) -> int:
        return len(self.edges)


def _check_descriptor(descriptor: np.ndarray, dims: int) -> np.ndarray:
    desc = np.asarray(descriptor, dtype=np.float64)
    if desc.shape != (dims,):
        raise ValueError(
            f"descriptor has {desc.shape} entries, grid expects {dims}"
        )
    if not np.all(np.isfinite(desc)):
        raise ValueError("cannot place a non-finite descriptor")
    return desc


def cell_of_uniform(descriptor: np.ndarray, spec: GridSpec) -> CellIndex:
    """Map a descriptor to its uniform-grid cell.

    Each coordinate bins as floor((d - lo) / (hi - lo) * R), clipped into
    range, so the top edge falls into the last bin and out-of-bounds
    values clamp to the border cells.
    """
    desc = _check_descriptor(descriptor, spec.dims)
    cell = []
    for d, (lo, hi), r in zip(desc, spec.bounds, spec.resolution):
        c = math.floor((d - lo) / (hi - lo) * r)
        cell.append(min(max(c, 0), r - 1))
    return tuple(cell)


def binary_flags(descriptor: np.ndarray, spec: GridSpec) -> tuple[bool, ...]:
    """Threshold a descriptor at each dimension's midpoint."""
    desc = _check_descriptor(descriptor, spec.dims)
    return tuple(
        bool(d >= (lo + hi) / 2.0) for d, (lo, hi) in zip(desc, spec.bounds)
    )


def cell_of_binary(flags: Sequence[bool]) -> CellIndex:
    """A binary feature vector is its own cell index."""
    if len(flags) == 0:
        raise ValueError("empty flag vector")
    return tuple(int(bool(f)) for f in flags)


def recompute_boundaries(buffer: np.ndarray, spec: GridSpec) -> BoundarySet:
    """Fit sliding boundaries to the observed descriptor distribution.

    For dimension i with resolution R, the interior edges sit at the
    nearest-rank percentiles j/R for j = 1 .. R-1: the edge is the
    ceil(j*n/R)-th smallest observed value. Ranks are computed with
    integer arithmetic so boundary placement never depends on float
    rounding of the percentile mark.
    """
    buf = np.asarray(buffer, dtype=np.float64)
    if buf.ndim != 2 or buf.shape[1] != spec.dims:
        raise ValueError(f"buffer must be (n, {spec.dims})")
    n = buf.shape[0]
    if n == 0:
        raise ValueError("cannot fit boundaries to an empty buffer")
    edges = []
    for i, r in enumerate(spec.resolution):
        vals = np.sort(buf[:, i])
        # nearest rank: ceil(j*n/r) as -((-j*n)//r), 1-indexed
        idx = [-((-j * n) // r) - 1 for j in range(1, r)]
        edges.append(vals[idx] if idx else np.empty(0, dtype=np.float64))
    return BoundarySet(tuple(edges))


def cell_of_sliding(descriptor: np.ndarray, boundaries: BoundarySet) -> CellIndex:
    """Bin of a descriptor under sliding boundaries.

    Coordinate i lands in the bin equal to the count of edges strictly
    below it, so duplicated edges collapse their bins onto the lower
    index and every value, even outside the fitted range, gets a cell.
    """
    desc = _check_descriptor(descriptor, boundaries.dims)
    cell = []
    for d, dim_edges in zip(desc, boundaries.edges):
        cell.append(int(np.searchsorted(dim_edges, d, side="left")))
    return tuple(cell)


def cell_of(
    descriptor: np.ndarray,
    spec: GridSpec,
    boundaries: Optional[BoundarySet] = None,
) -> CellIndex:
    """Dispatch placement on the grid kind."""
    if spec.kind == "uniform":
        return cell_of_uniform(descriptor, spec)
    if spec.kind == "binary":
        return cell_of_binary(binary_flags(descriptor, spec))
    if boundaries is None:
        raise ValueError("sliding grid placement requires boundaries")
    return cell_of_sliding(descriptor, boundaries)
