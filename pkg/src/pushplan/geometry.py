"""SE(2) pose algebra, 2D convex shapes, and penetration queries.

Everything here is value-semantic: poses and shapes are immutable after
construction and all operations are pure functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from shapely.geometry import MultiPoint

Vec2 = tuple[float, float]

_TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to [-pi, pi)."""
    theta = math.fmod(theta + math.pi, _TWO_PI)
    if theta < 0.0:
        theta += _TWO_PI
    return theta - math.pi


@dataclass(frozen=True, slots=True)
class Pose2:
    """A rigid 2D transform (x, y, theta); theta is kept in [-pi, pi)."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self) -> Vec2:
        return (self.x, self.y)

    def compose(self, other: "Pose2") -> "Pose2":
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def inverse(self) -> "Pose2":
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2(-c * self.x - s * self.y, s * self.x - c * self.y, -self.theta)

    def transform_point(self, p: Vec2) -> Vec2:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return (self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1])


IDENTITY = Pose2(0.0, 0.0, 0.0)


def compose(a: Pose2, b: Pose2) -> Pose2:
    return a.compose(b)


def relative_transform(s: Pose2, s_hat: Pose2) -> Pose2:
    """Body-frame motion taking pose ``s`` to pose ``s_hat``."""
    return s.inverse().compose(s_hat)


def _cross2(a: Vec2, b: Vec2) -> float:
    return a[0] * b[1] - a[1] * b[0]


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("circle radius must be positive")

    @property
    def circumradius(self) -> float:
        return self.radius

    @property
    def inradius(self) -> float:
        return self.radius

    def boundary_points(self, n: int = 16) -> list[Vec2]:
        return [
            (self.radius * math.cos(2.0 * math.pi * k / n),
             self.radius * math.sin(2.0 * math.pi * k / n))
            for k in range(n)
        ]


@dataclass(frozen=True)
class ConvexPolygon:
    """A strictly convex polygon in body frame, CCW winding."""

    vertices: tuple[Vec2, ...]
    _circumradius: float = field(init=False, repr=False, compare=False)
    _inradius: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        n = len(verts)
        for k in range(n):
            a, b, c = verts[k], verts[(k + 1) % n], verts[(k + 2) % n]
            turn = _cross2((b[0] - a[0], b[1] - a[1]), (c[0] - b[0], c[1] - b[1]))
            if turn <= 0.0:
                raise ValueError("polygon must be strictly convex with CCW winding")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(
            self, "_circumradius", max(math.hypot(x, y) for x, y in verts)
        )
        inr = math.inf
        for k in range(n):
            a, b = verts[k], verts[(k + 1) % n]
            ex, ey = b[0] - a[0], b[1] - a[1]
            elen = math.hypot(ex, ey)
            # distance from the origin to the edge line; valid because the
            # origin is assumed interior (vertices are centered on the body)
            inr = min(inr, abs(_cross2((ex, ey), a)) / elen)
        object.__setattr__(self, "_inradius", inr)

    @property
    def circumradius(self) -> float:
        return self._circumradius

    @property
    def inradius(self) -> float:
        return self._inradius

    def boundary_points(self, n: int = 0) -> list[Vec2]:
        return list(self.vertices)


Shape = Circle | ConvexPolygon


def box(size: float) -> ConvexPolygon:
    """Axis-aligned square of the given side length, centered at the origin."""
    h = size / 2.0
    return ConvexPolygon(((-h, -h), (h, -h), (h, h), (-h, h)))


def regular_polygon(n: int, circumradius: float) -> ConvexPolygon:
    return ConvexPolygon(
        tuple(
            (circumradius * math.cos(2.0 * math.pi * k / n),
             circumradius * math.sin(2.0 * math.pi * k / n))
            for k in range(n)
        )
    )


def world_points(shape: Shape, pose: Pose2, circle_samples: int = 16) -> list[Vec2]:
    """Boundary points of a shape placed at a pose, in world frame."""
    return [pose.transform_point(p) for p in shape.boundary_points(circle_samples)]


@dataclass(frozen=True, slots=True)
class Workspace:
    min: Vec2
    max: Vec2
    boundary_margin: float = 0.0

    def __post_init__(self):
        if not (self.max[0] > self.min[0] and self.max[1] > self.min[1]):
            raise ValueError("workspace max must exceed min componentwise")
        smaller = min(self.max[0] - self.min[0], self.max[1] - self.min[1])
        if not (0.0 <= self.boundary_margin < smaller / 2.0):
            raise ValueError("boundary_margin out of range")

    @property
    def width(self) -> float:
        return self.max[0] - self.min[0]

    @property
    def height(self) -> float:
        return self.max[1] - self.min[1]

    @property
    def center(self) -> Vec2:
        return ((self.min[0] + self.max[0]) / 2.0, (self.min[1] + self.max[1]) / 2.0)

    def contains(self, p: Vec2, margin: float = 0.0) -> bool:
        return (
            self.min[0] + margin <= p[0] <= self.max[0] - margin
            and self.min[1] + margin <= p[1] <= self.max[1] - margin
        )

    def edge_distance(self, p: Vec2) -> float:
        """Distance from a point to the nearest workspace edge (negative outside)."""
        return min(
            p[0] - self.min[0],
            self.max[0] - p[0],
            p[1] - self.min[1],
            self.max[1] - p[1],
        )


def convex_hull_distance(points_a: Sequence[Vec2], points_b: Sequence[Vec2]) -> float:
    """Minimum distance between the convex hulls of two point sets.

    Zero when the hulls intersect or touch.
    """
    if not points_a or not points_b:
        raise ValueError("point sets must be nonempty")
    hull_a = MultiPoint(list(points_a)).convex_hull
    hull_b = MultiPoint(list(points_b)).convex_hull
    return hull_a.distance(hull_b)


@dataclass(frozen=True, slots=True)
class Penetration:
    depth: float
    axis: Vec2  # unit vector; translating B by depth*axis separates it from A


def _project(verts: list[Vec2], axis: Vec2) -> tuple[float, float]:
    lo = hi = verts[0][0] * axis[0] + verts[0][1] * axis[1]
    for v in verts[1:]:
        d = v[0] * axis[0] + v[1] * axis[1]
        if d < lo:
            lo = d
        elif d > hi:
            hi = d
    return lo, hi


def _poly_axes(verts: list[Vec2]) -> list[Vec2]:
    axes = []
    n = len(verts)
    for k in range(n):
        a, b = verts[k], verts[(k + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        elen = math.hypot(ex, ey)
        axes.append((ey / elen, -ex / elen))  # outward normal for CCW winding
    return axes


def _sat(
    verts_a: list[Vec2], verts_b: list[Vec2],
    axes_a: list[Vec2] | None = None, axes_b: list[Vec2] | None = None,
) -> Optional[Penetration]:
    if axes_a is None:
        axes_a = _poly_axes(verts_a)
    if axes_b is None:
        axes_b = _poly_axes(verts_b)
    best_depth = math.inf
    best_axis: Vec2 = (1.0, 0.0)
    for axis in axes_a + axes_b:
        lo_a, hi_a = _project(verts_a, axis)
        lo_b, hi_b = _project(verts_b, axis)
        # directional push-out distances; plain interval overlap would
        # understate the depth when one projection contains the other
        d_pos = hi_a - lo_b  # translate B along +axis
        d_neg = hi_b - lo_a  # translate B along -axis
        if d_pos <= 0.0 or d_neg <= 0.0:
            return None
        if d_pos <= d_neg:
            depth, out = d_pos, axis
        else:
            depth, out = d_neg, (-axis[0], -axis[1])
        if depth < best_depth:
            best_depth = depth
            best_axis = out
    return Penetration(best_depth, best_axis)


def _circle_circle(ca: Vec2, ra: float, cb: Vec2, rb: float) -> Optional[Penetration]:
    dx, dy = cb[0] - ca[0], cb[1] - ca[1]
    d = math.hypot(dx, dy)
    depth = ra + rb - d
    if depth <= 0.0:
        return None
    axis = (dx / d, dy / d) if d > 1e-12 else (1.0, 0.0)
    return Penetration(depth, axis)


def _circle_poly(center: Vec2, radius: float, verts: list[Vec2]) -> Optional[Penetration]:
    """Penetration with axis oriented to move the circle out of the polygon."""
    n = len(verts)
    inside = True
    min_edge_dist = math.inf
    min_edge_normal: Vec2 = (1.0, 0.0)
    closest: Vec2 | None = None
    closest_d2 = math.inf
    for k in range(n):
        a, b = verts[k], verts[(k + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        rx, ry = center[0] - a[0], center[1] - a[1]
        signed = ex * ry - ey * rx  # >0 when center is on the interior side
        elen = math.hypot(ex, ey)
        dist_to_line = signed / elen
        if dist_to_line < 0.0:
            inside = False
        if dist_to_line < min_edge_dist:
            min_edge_dist = dist_to_line
            min_edge_normal = (ey / elen, -ex / elen)
        t = max(0.0, min(1.0, (rx * ex + ry * ey) / (elen * elen)))
        px, py = a[0] + t * ex, a[1] + t * ey
        d2 = (center[0] - px) ** 2 + (center[1] - py) ** 2
        if d2 < closest_d2:
            closest_d2 = d2
            closest = (px, py)
    if inside:
        return Penetration(radius + min_edge_dist, min_edge_normal)
    d = math.sqrt(closest_d2)
    depth = radius - d
    if depth <= 0.0:
        return None
    if d > 1e-12:
        axis = ((center[0] - closest[0]) / d, (center[1] - closest[1]) / d)
    else:
        axis = min_edge_normal
    return Penetration(depth, axis)


def penetration(
    shape_a: Shape, pose_a: Pose2, shape_b: Shape, pose_b: Pose2
) -> Optional[Penetration]:
    """Minimum-translation overlap between two convex shapes.

    Returns ``None`` when separated (or just touching); otherwise the depth
    and the unit axis along which B should translate to leave A.
    """
    # cheap rejection on bounding circles
    dx = pose_b.x - pose_a.x
    dy = pose_b.y - pose_a.y
    reach = shape_a.circumradius + shape_b.circumradius
    if dx * dx + dy * dy >= reach * reach:
        return None
    if isinstance(shape_a, Circle) and isinstance(shape_b, Circle):
        return _circle_circle(pose_a.position, shape_a.radius, pose_b.position, shape_b.radius)
    if isinstance(shape_a, Circle):
        verts_b = [pose_b.transform_point(v) for v in shape_b.vertices]
        pen = _circle_poly(pose_a.position, shape_a.radius, verts_b)
        if pen is None:
            return None
        return Penetration(pen.depth, (-pen.axis[0], -pen.axis[1]))
    if isinstance(shape_b, Circle):
        verts_a = [pose_a.transform_point(v) for v in shape_a.vertices]
        return _circle_poly(pose_b.position, shape_b.radius, verts_a)
    verts_a = [pose_a.transform_point(v) for v in shape_a.vertices]
    verts_b = [pose_b.transform_point(v) for v in shape_b.vertices]
    return _sat(verts_a, verts_b)
