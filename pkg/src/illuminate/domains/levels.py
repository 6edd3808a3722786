"""Tile-grid level domain.

A level is a W x H grid of wall, floor, start, exit and treasure tiles.
Feasibility is reachability: the exit and every treasure must be
reachable from the start by 4-connected moves over non-wall tiles.
"""
from __future__ import annotations

from collections import deque
from typing import Optional

import numpy as np

from ..core import DomainSpec, Evaluation, Individual, MalformedGenomeError

__all__ = ["TileLevelDomain", "WALL", "FLOOR", "START", "EXIT", "TREASURE"]

WALL, FLOOR, START, EXIT, TREASURE = 0, 1, 2, 3, 4

TILE_CHARS = {WALL: "#", FLOOR: ".", START: "S", EXIT: "E", TREASURE: "T"}
CHAR_TILES = {c: t for t, c in TILE_CHARS.items()}

# tile kinds a mutation may write; start/exit are preserved separately
FLIP_KINDS = np.array([WALL, FLOOR, TREASURE], dtype=np.uint8)


class TileLevelDomain(DomainSpec):
    """Dungeon-style tile levels with reachability constraints.

    Behavior descriptor, all in [0, 1]:
        wall_density     fraction of wall tiles
        path_ratio       tiles visited on the shortest start-exit path,
                         over total tiles (0 when the exit is cut off)
        mirror_symmetry  fraction of positions equal to their left-right
                         mirror image
    Fitness rewards open, traversable layouts: 1 - wall fraction when
    feasible, 0 otherwise.
    """

    name = "tile_level"

    def __init__(
        self,
        width: int = 10,
        height: int = 10,
        wall_rate: float = 0.35,
        treasure_rate: float = 0.04,
        flip_probs: tuple[float, float, float] = (0.45, 0.45, 0.10),
        max_flips: int = 4,
        relocate_rate: float = 0.1,
    ):
        if width < 2 or height < 1 or width * height < 2:
            raise ValueError("level needs room for a start and an exit")
        self.width = width
        self.height = height
        self.wall_rate = wall_rate
        self.treasure_rate = treasure_rate
        self.flip_probs = np.asarray(flip_probs, dtype=np.float64)
        self.max_flips = max_flips
        self.relocate_rate = relocate_rate

    @property
    def descriptor_dims(self) -> int:
        return 3

    @property
    def descriptor_bounds(self) -> tuple[tuple[float, float], ...]:
        return ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))

    @property
    def descriptor_names(self) -> tuple[str, ...]:
        return ("wall_density", "path_ratio", "mirror_symmetry")

    # genomes are (height, width) uint8 arrays of tile codes

    def random_genome(self, rng: np.random.Generator) -> np.ndarray:
        rolls = rng.random((self.height, self.width))
        grid = np.full((self.height, self.width), FLOOR, dtype=np.uint8)
        grid[rolls < self.wall_rate] = WALL
        grid[rolls > 1.0 - self.treasure_rate] = TREASURE
        flat = rng.choice(self.width * self.height, size=2, replace=False)
        grid.flat[flat[0]] = START
        grid.flat[flat[1]] = EXIT
        return grid

    def mutate(self, genome: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        grid = genome.copy()
        if rng.random() < self.relocate_rate:
            self._relocate_special(grid, rng)
        flippable = np.flatnonzero((grid != START) & (grid != EXIT))
        if flippable.size:
            n = int(rng.integers(1, self.max_flips + 1))
            picks = rng.choice(flippable, size=min(n, flippable.size), replace=False)
            grid.flat[picks] = rng.choice(
                FLIP_KINDS, size=picks.size, p=self.flip_probs
            )
        return grid

    def _relocate_special(self, grid: np.ndarray, rng: np.random.Generator):
        kind = START if rng.random() < 0.5 else EXIT
        other = EXIT if kind == START else START
        old = int(np.flatnonzero(grid == kind)[0])
        candidates = np.flatnonzero(grid.ravel() != other)
        new = int(rng.choice(candidates))
        grid.flat[old] = FLOOR
        grid.flat[new] = kind

    def crossover(
        self, a: np.ndarray, b: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        """Rectangular patch exchange: the child is parent a with a random
        rectangle copied in from parent b, repaired so exactly one start
        and one exit survive."""
        child = a.copy()
        r0, r1 = sorted(rng.integers(0, self.height + 1, size=2))
        c0, c1 = sorted(rng.integers(0, self.width + 1, size=2))
        child[r0:r1, c0:c1] = b[r0:r1, c0:c1]
        for kind in (START, EXIT):
            self._repair_special(child, kind, a)
        return child

    def _repair_special(self, grid: np.ndarray, kind: int, origin: np.ndarray):
        spots = np.flatnonzero(grid == kind)
        if spots.size == 1:
            return
        anchor = int(np.flatnonzero(origin == kind)[0])
        if spots.size == 0:
            other = EXIT if kind == START else START
            if grid.flat[anchor] == other:
                # the patch moved the other special onto this anchor;
                # restoring here would erase it, so take the first free cell
                candidates = np.flatnonzero(grid.ravel() != other)
                if candidates.size:
                    anchor = int(candidates[0])
            grid.flat[anchor] = kind
            return
        keep = anchor if anchor in spots else int(spots[0])
        for s in spots:
            if int(s) != keep:
                grid.flat[s] = FLOOR

    def _validate(self, genome: np.ndarray) -> np.ndarray:
        grid = np.asarray(genome)
        if grid.shape != (self.height, self.width):
            raise MalformedGenomeError(
                f"level shape {grid.shape} does not match "
                f"({self.height}, {self.width})"
            )
        if grid.dtype != np.uint8:
            grid = grid.astype(np.uint8)
        unknown = ~np.isin(grid, list(TILE_CHARS))
        if unknown.any():
            raise MalformedGenomeError("level contains unknown tile codes")
        for kind, label in ((START, "start"), (EXIT, "exit")):
            count = int(np.count_nonzero(grid == kind))
            if count != 1:
                raise MalformedGenomeError(
                    f"expected exactly one {label} tile, found {count}"
                )
        return grid

    def evaluate(self, genome: np.ndarray) -> Evaluation:
        grid = self._validate(genome)
        total = grid.size
        reachable = self._reachable_mask(grid)
        required = [tuple(p) for p in np.argwhere((grid == EXIT) | (grid == TREASURE))]
        unreachable = sum(1 for p in required if not reachable[p])
        feasible = unreachable == 0
        infeasibility = unreachable / (1 + len(required))
        wall_density = float(np.count_nonzero(grid == WALL)) / total
        path_ratio = self._path_tiles(grid, reachable) / total
        mirrored = grid[:, ::-1]
        symmetry = float(np.count_nonzero(grid == mirrored)) / total
        fitness = 1.0 - wall_density if feasible else 0.0
        return Evaluation(
            fitness=fitness,
            descriptor=np.array([wall_density, path_ratio, symmetry]),
            feasible=feasible,
            infeasibility=infeasibility,
        )

    def _reachable_mask(self, grid: np.ndarray) -> np.ndarray:
        """Breadth-first flood from the start over non-wall tiles."""
        h, w = grid.shape
        reachable = np.zeros((h, w), dtype=bool)
        sr, sc = map(int, np.argwhere(grid == START)[0])
        reachable[sr, sc] = True
        queue = deque([(sr, sc)])
        while queue:
            r, c = queue.popleft()
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= nr < h and 0 <= nc < w and not reachable[nr, nc]:
                    if grid[nr, nc] != WALL:
                        reachable[nr, nc] = True
                        queue.append((nr, nc))
        return reachable

    def _path_tiles(self, grid: np.ndarray, reachable: np.ndarray) -> int:
        """Tiles visited along the shortest start-exit walk, endpoints
        included; 0 when the exit is unreachable."""
        er, ec = map(int, np.argwhere(grid == EXIT)[0])
        if not reachable[er, ec]:
            return 0
        h, w = grid.shape
        sr, sc = map(int, np.argwhere(grid == START)[0])
        dist = np.full((h, w), -1, dtype=np.int32)
        dist[sr, sc] = 0
        queue = deque([(sr, sc)])
        while queue:
            r, c = queue.popleft()
            if (r, c) == (er, ec):
                break
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= nr < h and 0 <= nc < w and dist[nr, nc] < 0:
                    if grid[nr, nc] != WALL:
                        dist[nr, nc] = dist[r, c] + 1
                        queue.append((nr, nc))
        return int(dist[er, ec]) + 1

    def genome_to_text(self, genome: np.ndarray) -> str:
        return "\n".join(
            "".join(TILE_CHARS[int(t)] for t in row) for row in genome
        )

    def genome_from_text(self, text: str) -> np.ndarray:
        rows = text.splitlines()
        try:
            grid = np.array(
                [[CHAR_TILES[ch] for ch in row] for row in rows], dtype=np.uint8
            )
        except KeyError as exc:
            raise MalformedGenomeError(f"unknown tile character {exc}") from exc
        except ValueError as exc:
            raise MalformedGenomeError("ragged level rows") from exc
        return self._validate(grid)

    # distance space: raw tiles under Hamming distance, so two levels are
    # as far apart as the number of tiles on which they differ

    def distance_vector(self, individual: Individual) -> np.ndarray:
        return np.asarray(individual.genome, dtype=np.float64).ravel()

    @property
    def distance_metric(self) -> str:
        return "hamming"

    def default_novelty_threshold(self) -> float:
        return 0.10 * self.width * self.height


def level_distance(a: np.ndarray, b: np.ndarray) -> int:
    """Tiles on which two equally shaped levels differ."""
    ga, gb = np.asarray(a), np.asarray(b)
    if ga.shape != gb.shape:
        raise ValueError(f"level shapes differ: {ga.shape} vs {gb.shape}")
    return int(np.count_nonzero(ga != gb))
