"""Quasi-static transition model for object-centric pushing.

One object at a time is driven along a trajectory while every other object
moves only through contact. Overlaps are removed by iterative position
projection: each overlapping pair is translated apart along the
minimum-translation axis until the residual depth falls under tolerance.
Passively displaced objects translate without rotating; only the pusher
imparts rotation, through a simple offset-based coupling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geometry import (
    Circle, Penetration, Pose2, Shape, Workspace, penetration,
    _circle_circle, _circle_poly, _poly_axes, _sat,
)

Trajectory = list[Pose2]


@dataclass(frozen=True, slots=True)
class Arrangement:
    """Poses, shapes and class labels of all movable objects."""

    poses: tuple[Pose2, ...]
    shapes: tuple[Shape, ...]
    classes: tuple[int, ...]

    def __post_init__(self):
        n = len(self.poses)
        if n < 1 or len(self.shapes) != n or len(self.classes) != n:
            raise ValueError("poses, shapes and classes must have equal length >= 1")
        object.__setattr__(self, "poses", tuple(self.poses))
        object.__setattr__(self, "shapes", tuple(self.shapes))
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def n(self) -> int:
        return len(self.poses)

    def positions(self) -> list[tuple[float, float]]:
        return [(p.x, p.y) for p in self.poses]

    def with_pose(self, i: int, pose: Pose2) -> "Arrangement":
        poses = list(self.poses)
        poses[i] = pose
        return replace(self, poses=tuple(poses))


@dataclass(frozen=True, slots=True)
class SimParams:
    step_length: float = 0.002
    max_resolve_iters: int = 64
    penetration_tol: float = 1e-4
    pusher_radius: float = 0.005
    rotation_coupling: float = 1.0

    def __post_init__(self):
        if self.step_length <= 0.0 or self.penetration_tol <= 0.0:
            raise ValueError("step_length and penetration_tol must be positive")
        if self.max_resolve_iters < 1:
            raise ValueError("max_resolve_iters must be positive")


@dataclass(frozen=True, slots=True)
class ResolveResult:
    arrangement: "Arrangement"
    resolved: bool


def _resolve_poses(
    poses: list[Pose2],
    shapes: tuple[Shape, ...],
    pinned: frozenset[int],
    params: SimParams,
    active: set[int] | None = None,
) -> bool:
    """In-place projection passes; returns False when the cap is hit with a
    residual depth above 10x tolerance.

    ``active`` names the objects that moved since the arrangement was last
    penetration-free; only pairs touching an active object can newly
    overlap, so the rest are skipped. None means everything is suspect.
    World-frame vertices and separating axes are cached per object and
    invalidated when it moves.
    """
    n = len(poses)
    tol = params.penetration_tol
    verts: list = [None] * n
    axes: list = [None] * n

    def world(k: int):
        if verts[k] is None:
            verts[k] = [poses[k].transform_point(v) for v in shapes[k].vertices]
            axes[k] = _poly_axes(verts[k])

    def pair_pen(i: int, j: int):
        si, sj = shapes[i], shapes[j]
        pi, pj = poses[i], poses[j]
        dx, dy = pj.x - pi.x, pj.y - pi.y
        reach = si.circumradius + sj.circumradius
        if dx * dx + dy * dy >= reach * reach:
            return None
        ci = isinstance(si, Circle)
        cj = isinstance(sj, Circle)
        if ci and cj:
            return _circle_circle(pi.position, si.radius, pj.position, sj.radius)
        if ci:
            world(j)
            pen = _circle_poly(pi.position, si.radius, verts[j])
            if pen is None:
                return None
            return Penetration(pen.depth, (-pen.axis[0], -pen.axis[1]))
        if cj:
            world(i)
            return _circle_poly(pj.position, sj.radius, verts[i])
        world(i)
        world(j)
        return _sat(verts[i], verts[j], axes[i], axes[j])

    def shift(k: int, dx: float, dy: float):
        p = poses[k]
        poses[k] = Pose2(p.x + dx, p.y + dy, p.theta)
        verts[k] = None

    suspect = set(range(n)) if active is None else set(active)
    residual = 0.0
    for _ in range(params.max_resolve_iters):
        moved: set[int] = set()
        residual = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                if i not in suspect and j not in suspect and not (
                    i in moved or j in moved
                ):
                    continue
                pen = pair_pen(i, j)
                if pen is None or pen.depth <= tol:
                    continue
                residual = max(residual, pen.depth)
                i_pinned = i in pinned
                j_pinned = j in pinned
                if i_pinned and j_pinned:
                    continue
                ax, ay = pen.axis
                if i_pinned:
                    shift(j, ax * pen.depth, ay * pen.depth)
                    moved.add(j)
                elif j_pinned:
                    shift(i, -ax * pen.depth, -ay * pen.depth)
                    moved.add(i)
                else:
                    half = pen.depth / 2.0
                    shift(i, -ax * half, -ay * half)
                    shift(j, ax * half, ay * half)
                    moved.add(i)
                    moved.add(j)
        if not moved:
            return True
        suspect = moved
    return residual <= 10.0 * tol


def resolve_penetrations(
    arr: Arrangement, pinned: set[int] | frozenset[int], params: SimParams
) -> ResolveResult:
    """Project overlapping objects apart; pinned objects never move.

    Depth is split evenly between two free bodies and assigned entirely to
    the free body when the other is pinned. Displaced objects translate only.
    """
    poses = list(arr.poses)
    ok = _resolve_poses(poses, arr.shapes, frozenset(pinned), params)
    if poses == list(arr.poses):
        return ResolveResult(arr, ok)
    return ResolveResult(replace(arr, poses=tuple(poses)), ok)


@dataclass(frozen=True, slots=True)
class SimResult:
    arrangement: Arrangement
    valid: bool


def _substep_count(dist: float, dtheta: float, circumradius: float, step: float) -> int:
    travel = max(dist, abs(dtheta) * circumradius)
    return max(1, math.ceil(travel / step - 1e-12))


def simulate_trajectory(
    arr: Arrangement, i: int, traj: Trajectory, ws: Workspace, params: SimParams
) -> SimResult:
    """Drive object ``i`` along a waypoint trajectory, displacing the rest
    through contact only. The driven object is pinned at its interpolated
    pose at every sub-step."""
    if not traj:
        raise ValueError("trajectory must be nonempty")
    poses = list(arr.poses)
    shapes = arr.shapes
    pinned = frozenset((i,))
    circum = shapes[i].circumradius
    all_ok = True
    for wp in traj:
        start = poses[i]
        dx, dy = wp.x - start.x, wp.y - start.y
        dist = math.hypot(dx, dy)
        dtheta = _angle_diff(wp.theta, start.theta)
        steps = _substep_count(dist, dtheta, circum, params.step_length)
        for k in range(1, steps + 1):
            t = k / steps
            poses[i] = Pose2(start.x + dx * t, start.y + dy * t, start.theta + dtheta * t)
            if not _resolve_poses(poses, shapes, pinned, params, active={i}):
                all_ok = False
        poses[i] = wp  # land exactly on the waypoint
    out = replace(arr, poses=tuple(poses))
    valid = all_ok and all(ws.contains((p.x, p.y)) for p in poses)
    return SimResult(out, valid)


def _angle_diff(target: float, source: float) -> float:
    d = math.fmod(target - source + math.pi, 2.0 * math.pi)
    if d < 0.0:
        d += 2.0 * math.pi
    return d - math.pi


@dataclass(frozen=True, slots=True)
class PushResult:
    arrangement: Arrangement
    pusher_end: tuple[float, float]


def pusher_step(
    arr: Arrangement,
    pusher_pos: tuple[float, float],
    direction: tuple[float, float],
    distance: float,
    ws: Workspace,
    params: SimParams,
) -> PushResult:
    """Translate a circular pusher through the scene, displacing contacted
    objects (chained contacts propagate through the resolver).

    Pusher-object contact also applies a rotation proportional to the
    tangential offset of the pusher from the object's center.
    """
    if distance <= 0.0:
        raise ValueError("push distance must be positive")
    norm = math.hypot(direction[0], direction[1])
    ux, uy = direction[0] / norm, direction[1] / norm
    poses = list(arr.poses)
    shapes = tuple(arr.shapes) + (Circle(params.pusher_radius),)
    pusher_idx = arr.n
    pinned = frozenset((pusher_idx,))
    px, py = pusher_pos
    steps = max(1, math.ceil(distance / params.step_length - 1e-12))
    sub = distance / steps
    k_rot = params.rotation_coupling
    for _ in range(steps):
        px += ux * sub
        py += uy * sub
        pusher_pose = Pose2(px, py, 0.0)
        active = {pusher_idx}
        if k_rot != 0.0:
            for j in range(arr.n):
                pen = penetration(shapes[j], poses[j], shapes[pusher_idx], pusher_pose)
                if pen is None:
                    continue
                r = arr.shapes[j].circumradius
                # tangential offset of the pusher from the object's center,
                # measured across the push direction and clamped to the body
                t = ux * (py - poses[j].y) - uy * (px - poses[j].x)
                t = max(-r, min(r, t))
                dth = -k_rot * (t / r) * (sub / r)
                pj = poses[j]
                poses[j] = Pose2(pj.x, pj.y, pj.theta + dth)
                active.add(j)
        all_poses = poses + [pusher_pose]
        _resolve_poses(all_poses, shapes, pinned, params, active=active)
        poses = all_poses[:pusher_idx]
    return PushResult(replace(arr, poses=tuple(poses)), (px, py))
