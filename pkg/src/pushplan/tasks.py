"""Task variants: goal criteria, heuristic costs, gradients, goal assignment.

Two families of tasks are supported. Sorting without goal regions asks for
the per-class convex hulls to be separated by a clearance threshold; its
cost combines intra-class spread with an inter-class centroid repulsion
term. Goal-region tasks ask every object to sit inside its (possibly
dynamically assigned) circular region; the cost is the normalized squared
distance of each unsolved object to its region center.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import Workspace, convex_hull_distance, world_points
from .sim import Arrangement

Vec2 = tuple[float, float]


@dataclass(frozen=True, slots=True)
class GoalRegion:
    center: Vec2
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("goal region radius must be positive")

    def contains(self, p: Vec2) -> bool:
        return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius


@dataclass(frozen=True)
class SortNoGoals:
    """Separate object classes without explicit goal regions."""

    num_classes: int
    separation_threshold: float = 0.05
    cluster_weight: float = 1.0
    repel_scale: float = 0.15

    def __post_init__(self):
        if self.separation_threshold <= 0.0:
            raise ValueError("separation_threshold must be positive")

    @classmethod
    def for_workspace(cls, ws: Workspace, num_classes: int,
                      separation_threshold: float = 0.05) -> "SortNoGoals":
        return cls(
            num_classes=num_classes,
            separation_threshold=separation_threshold,
            cluster_weight=1.0 / ws.width**2,
            repel_scale=0.25 * ws.width,
        )


@dataclass(frozen=True)
class GoalRegionsTask:
    """Relocate each object inside its circular goal region.

    ``interchange_groups`` lists index sets whose members share an
    interchangeable pool of regions; their assignment is recomputed on
    every evaluation by minimizing the summed object-to-center distances.
    """

    regions: tuple[GoalRegion, ...]
    interchange_groups: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(
            self, "interchange_groups",
            tuple(tuple(g) for g in self.interchange_groups),
        )
        for group in self.interchange_groups:
            centers = {self.regions[i].center for i in group}
            if len(centers) != len(group):
                raise ValueError(
                    "interchange group must hold as many distinct regions as objects"
                )


TaskSpec = SortNoGoals | GoalRegionsTask


@dataclass(frozen=True, slots=True)
class GradientParams:
    fd_step_pos: float = 0.001
    fd_step_theta: float = 0.01

    def __post_init__(self):
        if self.fd_step_pos <= 0.0 or self.fd_step_theta <= 0.0:
            raise ValueError("finite-difference steps must be positive")


def assign_goals(
    positions: list[Vec2], regions: list[GoalRegion]
) -> list[int]:
    """Bijection objects -> regions minimizing summed center distances.

    Returns, for each object index in ``positions``, the index of its
    assigned region in ``regions``. Solved exactly with the Hungarian
    method.
    """
    if len(positions) != len(regions):
        raise ValueError("need as many regions as objects")
    cost = np.array(
        [
            [math.hypot(p[0] - r.center[0], p[1] - r.center[1]) for r in regions]
            for p in positions
        ]
    )
    rows, cols = linear_sum_assignment(cost)
    out = [0] * len(positions)
    for r, c in zip(rows, cols):
        out[r] = int(c)
    return out


def effective_regions(spec: GoalRegionsTask, positions: list[Vec2]) -> list[GoalRegion]:
    """Per-object regions after resolving interchange-group assignments."""
    regions = list(spec.regions)
    for group in spec.interchange_groups:
        pool = [spec.regions[i] for i in group]
        pts = [positions[i] for i in group]
        assignment = assign_goals(pts, pool)
        for member, region_idx in zip(group, assignment):
            regions[member] = pool[region_idx]
    return regions


def _class_hull_points(arr: Arrangement, label: int) -> list[Vec2]:
    pts: list[Vec2] = []
    for pose, shape, cls in zip(arr.poses, arr.shapes, arr.classes):
        if cls == label:
            pts.extend(world_points(shape, pose))
    return pts


def goal_satisfied(spec: TaskSpec, arr: Arrangement) -> bool:
    if isinstance(spec, GoalRegionsTask):
        positions = arr.positions()
        regions = effective_regions(spec, positions)
        return all(r.contains(p) for p, r in zip(positions, regions))
    labels = sorted(set(arr.classes))
    hulls = {label: _class_hull_points(arr, label) for label in labels}
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            d = convex_hull_distance(hulls[labels[a]], hulls[labels[b]])
            if d <= spec.separation_threshold:
                return False
    return True


def _heuristic_positions(spec: TaskSpec, positions: list[Vec2],
                         classes: tuple[int, ...]) -> float:
    if isinstance(spec, GoalRegionsTask):
        regions = effective_regions(spec, positions)
        h = 0.0
        for p, r in zip(positions, regions):
            d = math.hypot(p[0] - r.center[0], p[1] - r.center[1])
            if d > r.radius:
                h += d * d / (r.radius * r.radius)
        return h
    labels = sorted(set(classes))
    centroids: dict[int, Vec2] = {}
    h = 0.0
    for label in labels:
        pts = [p for p, c in zip(positions, classes) if c == label]
        cx = sum(p[0] for p in pts) / len(pts)
        cy = sum(p[1] for p in pts) / len(pts)
        centroids[label] = (cx, cy)
        h += spec.cluster_weight * sum(
            (p[0] - cx) ** 2 + (p[1] - cy) ** 2 for p in pts
        )
    rho2 = spec.repel_scale**2
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            ca, cb = centroids[labels[a]], centroids[labels[b]]
            d2 = (ca[0] - cb[0]) ** 2 + (ca[1] - cb[1]) ** 2
            h += math.exp(-d2 / rho2)
    return h


def heuristic(spec: TaskSpec, arr: Arrangement) -> float:
    """Nonnegative task-progress cost; smaller is closer to the goal."""
    return _heuristic_positions(spec, arr.positions(), arr.classes)


def heuristic_gradient(
    spec: TaskSpec, arr: Arrangement, params: GradientParams = GradientParams()
) -> list[tuple[float, float, float]]:
    """Central finite-difference gradient of the heuristic per object,
    as (d/dx, d/dy, d/dtheta) triples."""
    positions = arr.positions()
    classes = arr.classes
    grads = []
    dp = params.fd_step_pos
    for i, (x, y) in enumerate(positions):
        moved = list(positions)
        moved[i] = (x + dp, y)
        h_xp = _heuristic_positions(spec, moved, classes)
        moved[i] = (x - dp, y)
        h_xm = _heuristic_positions(spec, moved, classes)
        moved[i] = (x, y + dp)
        h_yp = _heuristic_positions(spec, moved, classes)
        moved[i] = (x, y - dp)
        h_ym = _heuristic_positions(spec, moved, classes)
        # both task families depend on positions only, so the theta
        # component vanishes identically
        grads.append(((h_xp - h_xm) / (2 * dp), (h_yp - h_ym) / (2 * dp), 0.0))
    return grads
