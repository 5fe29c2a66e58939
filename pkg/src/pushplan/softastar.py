"""Grid trajectory planning with soft collision costs.

The workspace is discretized into cells whose values in [0, 1] rate how
much placing the activated object there would collide with its neighbors.
A* then minimizes path length plus the scaled cell values along the way;
cells at value 1 are impassable.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose2, Workspace
from .sim import Arrangement, Trajectory
from .tasks import TaskSpec, _heuristic_positions

Cell = tuple[int, int]  # (row, col); row scans y, col scans x


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    cell_size: float
    origin: tuple[float, float]
    values: np.ndarray  # shape (height, width), entries in [0, 1]

    def cell_center(self, cell: Cell) -> tuple[float, float]:
        row, col = cell
        return (
            self.origin[0] + (col + 0.5) * self.cell_size,
            self.origin[1] + (row + 0.5) * self.cell_size,
        )

    def nearest_cell(self, p: tuple[float, float]) -> Cell:
        col = int((p[0] - self.origin[0]) / self.cell_size)
        row = int((p[1] - self.origin[1]) / self.cell_size)
        return (
            max(0, min(self.height - 1, row)),
            max(0, min(self.width - 1, col)),
        )


@dataclass(frozen=True, slots=True)
class SoftAStarParams:
    c_min: float
    c_max: float
    cell_size: float

    def __post_init__(self):
        if not (0.0 < self.c_min < self.c_max):
            raise ValueError("require 0 < c_min < c_max")
        if self.cell_size <= 0.0:
            raise ValueError("cell_size must be positive")


def default_params(arr: Arrangement, i: int) -> SoftAStarParams:
    """Clearance thresholds and resolution derived from object sizes:
    below c_min overlap is certain, above c_max clearance is certain."""
    others = [s for j, s in enumerate(arr.shapes) if j != i]
    if not others:  # lone object: grid is collision-free everywhere
        others = [arr.shapes[i]]
    cell = max(2.0 * s.circumradius for s in arr.shapes)
    c_min = arr.shapes[i].inradius + min(s.inradius for s in others)
    c_max = (
        arr.shapes[i].circumradius
        + max(s.circumradius for s in others)
        + cell / 2.0
    )
    return SoftAStarParams(c_min=c_min, c_max=c_max, cell_size=cell)


def build_grid(
    arr: Arrangement, i: int, ws: Workspace, params: SoftAStarParams
) -> GridMap:
    """Per-cell soft collision value from the distance to the nearest
    other object's center."""
    delta = params.cell_size
    width = max(1, math.ceil(ws.width / delta - 1e-9))
    height = max(1, math.ceil(ws.height / delta - 1e-9))
    xs = ws.min[0] + (np.arange(width) + 0.5) * delta
    ys = ws.min[1] + (np.arange(height) + 0.5) * delta
    gx, gy = np.meshgrid(xs, ys)  # shape (height, width)
    d = np.full((height, width), np.inf)
    for j, pose in enumerate(arr.poses):
        if j == i:
            continue
        d = np.minimum(d, np.hypot(gx - pose.x, gy - pose.y))
    span = params.c_max - params.c_min
    values = np.clip((params.c_max - d) / span, 0.0, 1.0)
    values[d < params.c_min] = 1.0
    values[d > params.c_max] = 0.0
    if ws.boundary_margin > 0.0:
        # cells inside the out-of-bounds guard band are impassable
        edge = np.minimum(
            np.minimum(gx - ws.min[0], ws.max[0] - gx),
            np.minimum(gy - ws.min[1], ws.max[1] - gy),
        )
        values[edge < ws.boundary_margin] = 1.0
    return GridMap(width=width, height=height, cell_size=delta,
                   origin=ws.min, values=values)


def find_goal_cell(grid: GridMap, spec: TaskSpec, arr: Arrangement, i: int) -> Cell:
    """Exhaustive argmin of the task heuristic over cell centers for the
    activated object; ties break toward the lowest (row, col)."""
    positions = arr.positions()
    best: Cell = (0, 0)
    best_h = math.inf
    for row in range(grid.height):
        for col in range(grid.width):
            positions[i] = grid.cell_center((row, col))
            h = _heuristic_positions(spec, positions, arr.classes)
            if h < best_h - 1e-15:
                best_h = h
                best = (row, col)
    return best


_NEIGHBORS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


def soft_astar(
    grid: GridMap, start: Cell, goal: Cell, hard: bool = False
) -> tuple[list[Cell], float] | None:
    """A* over 8-connected cells minimizing length + scaled collision value.

    Cells at value 1 are never entered (the start is exempt: the object is
    already there). With ``hard`` set, any nonzero value blocks, which turns
    the search into plain collision-free A*. Returns None when the goal is
    unreachable.
    """
    values = grid.values
    blocked = (lambda v: v > 0.0) if hard else (lambda v: v >= 1.0)
    if blocked(values[goal]):
        return None
    if start == goal:
        return [start], 0.0
    delta = grid.cell_size
    gp = grid.cell_center(goal)

    def h_astar(cell: Cell) -> float:
        cp = grid.cell_center(cell)
        return math.hypot(cp[0] - gp[0], cp[1] - gp[1])

    g_cost: dict[Cell, float] = {start: 0.0}
    parent: dict[Cell, Cell] = {}
    closed: set[Cell] = set()
    open_heap: list[tuple[float, float, Cell]] = [(h_astar(start), h_astar(start), start)]
    while open_heap:
        f, _, cell = heapq.heappop(open_heap)
        if cell in closed:
            continue
        if cell == goal:
            path = [cell]
            while cell in parent:
                cell = parent[cell]
                path.append(cell)
            path.reverse()
            return path, g_cost[goal]
        closed.add(cell)
        row, col = cell
        base = g_cost[cell]
        for dr, dc in _NEIGHBORS:
            nr, nc = row + dr, col + dc
            if nr < 0 or nr >= grid.height or nc < 0 or nc >= grid.width:
                continue
            nxt = (nr, nc)
            if nxt in closed:
                continue
            v = float(values[nr, nc])
            if blocked(v):
                continue
            step = delta * math.sqrt(2.0) if dr and dc else delta
            cost = base + step + delta * v
            if cost < g_cost.get(nxt, math.inf) - 1e-15:
                g_cost[nxt] = cost
                parent[nxt] = cell
                hn = h_astar(nxt)
                heapq.heappush(open_heap, (cost + hn, hn, nxt))
    return None


def path_to_trajectory(path: list[Cell], grid: GridMap, theta: float) -> Trajectory:
    """Waypoints at the cell centers past the start cell, constant heading."""
    if not path:
        raise ValueError("path must be nonempty")
    return [Pose2(*grid.cell_center(c), theta) for c in path[1:]]
