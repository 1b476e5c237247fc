"""Random instances and the built-in benchmark maps."""
from __future__ import annotations

import random
from collections import deque
from functools import lru_cache

import numpy as np

from .model import GridMap, Instance, Task


class GenerationError(ValueError):
    pass


def _connected(blocked: np.ndarray) -> bool:
    free = list(zip(*np.nonzero(~blocked)))
    if not free:
        return False
    h, w = blocked.shape
    seen = {free[0]}
    queue = deque([free[0]])
    while queue:
        r, c = queue.popleft()
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= nr < h and 0 <= nc < w and not blocked[nr, nc] and (nr, nc) not in seen:
                seen.add((nr, nc))
                queue.append((nr, nc))
    return len(seen) == len(free)


def random_grid(seed: int, height: int, width: int, density: float) -> GridMap:
    """Grid with ``round(density * cells)`` obstacles whose free cells stay connected."""
    rng = random.Random(seed)
    target = int(round(density * height * width))
    blocked = np.zeros((height, width), dtype=bool)
    cells = [(r, c) for r in range(height) for c in range(width)]
    rng.shuffle(cells)
    placed = 0
    for r, c in cells:
        if placed == target:
            break
        blocked[r, c] = True
        if _connected(blocked):
            placed += 1
        else:
            blocked[r, c] = False
    if placed < target:
        raise GenerationError(f"cannot place {target} obstacles without disconnecting the map")
    return GridMap(blocked)


def warehouse_grid(seed: int = 0) -> GridMap:
    """20x20 warehouse: four double-row shelf bands, 120 blocked cells (30%)."""
    rng = random.Random(seed)
    blocked = np.zeros((20, 20), dtype=bool)
    for top in (2, 6, 10, 14):
        gaps = set(rng.sample(range(1, 19), 3))
        for c in range(1, 19):
            if c not in gaps:
                blocked[top, c] = blocked[top + 1, c] = True
    return GridMap(blocked)


@lru_cache(maxsize=None)
def builtin_map(name: str) -> GridMap:
    if name == "dense20":
        return warehouse_grid(seed=0)
    if name == "sparse32":
        return random_grid(seed=32, height=32, width=32, density=0.10)
    if name == "empty32":
        return GridMap.open(32, 32)
    raise KeyError(f"unknown built-in map {name!r}")


BUILTIN_MAPS = ("dense20", "sparse32", "empty32")


def generate_instance(seed: int, grid: GridMap, m: int, k_min: int, k_max: int) -> Instance:
    """Random instance: distinct starts, task lengths uniform in [k_min, k_max],
    goals drawn from free cells without consecutive repeats."""
    if m < 1:
        raise GenerationError("m >= 1 required")
    if not 1 <= k_min <= k_max:
        raise GenerationError("need 1 <= k_min <= k_max")
    free = list(grid.free_cells)
    if m > len(free):
        raise GenerationError(f"{m} agents but only {len(free)} free cells")
    if k_max > 1 and len(free) < 2:
        raise GenerationError("multi-goal tasks need at least two free cells")
    if not _connected(grid.blocked):
        raise GenerationError("free cells of the map are not connected")
    rng = random.Random(seed)
    starts = rng.sample(free, m)
    tasks = []
    for _ in range(m):
        k = rng.randint(k_min, k_max)
        goals = [rng.choice(free)]
        while len(goals) < k:
            g = rng.choice(free)
            if g != goals[-1]:
                goals.append(g)
        tasks.append(Task(goals))
    return Instance(grid, starts, tasks)
