"""Grid navigation over the terrain: traversability, line of sight, A* paths.

The path oracle answers both planning queries (path length) and execution
queries (waypoints).  Wheeled robots may only cross flat cells; legged robots
also cross rough cells; nobody crosses blocked cells.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Pose, euclidean

FLAT, ROUGH, BLOCKED = 0, 1, 2

SQRT2 = math.sqrt(2.0)
_NEIGHBORS = [(-1, -1, SQRT2), (-1, 0, 1.0), (-1, 1, SQRT2),
              (0, -1, 1.0), (0, 1, 1.0),
              (1, -1, SQRT2), (1, 0, 1.0), (1, 1, SQRT2)]


@dataclass
class Terrain:
    """Rectangular world with per-cell traversability classes."""

    width: float
    height: float
    cell_size: float = 0.25
    cells: Optional[np.ndarray] = None  # shape (rows, cols), dtype uint8

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell_size must be > 0")
        self.cols = max(1, int(round(self.width / self.cell_size)))
        self.rows = max(1, int(round(self.height / self.cell_size)))
        if self.cells is None:
            self.cells = np.zeros((self.rows, self.cols), dtype=np.uint8)
        else:
            self.cells = np.asarray(self.cells, dtype=np.uint8)
            if self.cells.shape != (self.rows, self.cols):
                raise ValueError("cells shape does not match bounds/cell_size")

    def in_bounds(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        col = min(self.cols - 1, max(0, int(x / self.cell_size)))
        row = min(self.rows - 1, max(0, int(y / self.cell_size)))
        return row, col

    def center_of(self, row: int, col: int) -> tuple[float, float]:
        return ((col + 0.5) * self.cell_size, (row + 0.5) * self.cell_size)

    def cell_class(self, row: int, col: int) -> int:
        return int(self.cells[row, col])

    def traversable(self, row: int, col: int, kinematics: str) -> bool:
        c = self.cells[row, col]
        if c == BLOCKED:
            return False
        if c == ROUGH and kinematics == "wheeled":
            return False
        return True

    def set_patch(self, x0: float, y0: float, x1: float, y1: float, cls: int) -> None:
        r0, c0 = self.cell_of(min(x0, x1), min(y0, y1))
        r1, c1 = self.cell_of(max(x0, x1), max(y0, y1))
        self.cells[r0:r1 + 1, c0:c1 + 1] = cls


def _supercover_cells(terrain: Terrain, a: tuple[float, float],
                      b: tuple[float, float]):
    """All cells a segment passes through (conservative sampling)."""
    length = math.hypot(b[0] - a[0], b[1] - a[1])
    steps = max(1, int(length / (terrain.cell_size * 0.5)))
    seen = set()
    for i in range(steps + 1):
        f = i / steps
        x = a[0] + (b[0] - a[0]) * f
        y = a[1] + (b[1] - a[1]) * f
        seen.add(terrain.cell_of(x, y))
    return seen


def line_of_sight(terrain: Terrain, a, b, kinematics: str) -> bool:
    ax, ay = (a.x, a.y) if isinstance(a, Pose) else (a[0], a[1])
    bx, by = (b.x, b.y) if isinstance(b, Pose) else (b[0], b[1])
    if not (terrain.in_bounds(ax, ay) and terrain.in_bounds(bx, by)):
        return False
    return all(terrain.traversable(r, c, kinematics)
               for r, c in _supercover_cells(terrain, (ax, ay), (bx, by)))


def _astar(terrain: Terrain, start_cell, goal_cell, kinematics: str
           ) -> Optional[list[tuple[int, int]]]:
    if not terrain.traversable(*goal_cell, kinematics):
        return None
    if not terrain.traversable(*start_cell, kinematics):
        return None
    if start_cell == goal_cell:
        return [start_cell]

    def h(cell):
        dr = abs(cell[0] - goal_cell[0])
        dc = abs(cell[1] - goal_cell[1])
        return max(dr, dc) + (SQRT2 - 1.0) * min(dr, dc)

    open_heap = [(h(start_cell), 0.0, start_cell)]
    g = {start_cell: 0.0}
    came: dict = {}
    closed = set()
    while open_heap:
        _, gc, cur = heapq.heappop(open_heap)
        if cur in closed:
            continue
        if cur == goal_cell:
            path = [cur]
            while cur in came:
                cur = came[cur]
                path.append(cur)
            path.reverse()
            return path
        closed.add(cur)
        for dr, dc, step in _NEIGHBORS:
            nxt = (cur[0] + dr, cur[1] + dc)
            if not (0 <= nxt[0] < terrain.rows and 0 <= nxt[1] < terrain.cols):
                continue
            if not terrain.traversable(*nxt, kinematics):
                continue
            ng = gc + step
            if ng < g.get(nxt, math.inf):
                g[nxt] = ng
                came[nxt] = cur
                heapq.heappush(open_heap, (ng + h(nxt), ng, nxt))
    return None


def _smooth(terrain: Terrain, points: list[tuple[float, float]],
            kinematics: str) -> list[tuple[float, float]]:
    """Greedy line-of-sight shortcutting of a waypoint chain."""
    if len(points) <= 2:
        return points
    out = [points[0]]
    i = 0
    while i < len(points) - 1:
        j = len(points) - 1
        while j > i + 1 and not line_of_sight(terrain, out[-1], points[j],
                                              kinematics):
            j -= 1
        out.append(points[j])
        i = j
    return out


class GridNav:
    """Path oracle over one terrain for one kinematics class."""

    def __init__(self, terrain: Terrain, kinematics: str = "legged"):
        self.terrain = terrain
        self.kinematics = kinematics

    def find_path(self, start, goal) -> Optional[list[tuple[float, float]]]:
        """Waypoints from start to goal, or None when unreachable."""
        sx, sy = (start.x, start.y) if isinstance(start, Pose) else start[:2]
        gx, gy = (goal.x, goal.y) if isinstance(goal, Pose) else goal[:2]
        if not (self.terrain.in_bounds(sx, sy) and self.terrain.in_bounds(gx, gy)):
            return None
        if not self.terrain.traversable(*self.terrain.cell_of(gx, gy),
                                        self.kinematics):
            return None
        if line_of_sight(self.terrain, (sx, sy), (gx, gy), self.kinematics):
            return [(sx, sy), (gx, gy)]
        cells = _astar(self.terrain, self.terrain.cell_of(sx, sy),
                       self.terrain.cell_of(gx, gy), self.kinematics)
        if cells is None:
            return None
        points = [(sx, sy)] + [self.terrain.center_of(r, c) for r, c in cells] \
            + [(gx, gy)]
        return _smooth(self.terrain, points, self.kinematics)

    def path_length(self, start, goal) -> Optional[float]:
        """Path oracle interface for the utility engine; None when no path."""
        path = self.find_path(start, goal)
        if path is None:
            return None
        length = sum(math.hypot(b[0] - a[0], b[1] - a[1])
                     for a, b in zip(path, path[1:]))
        # The grid metric never reports shorter than straight line.
        return max(length, euclidean(start, goal))

    def __call__(self, start, goal) -> Optional[float]:
        return self.path_length(start, goal)
