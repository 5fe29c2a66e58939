import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pushplan.geometry import (
    Circle, ConvexPolygon, Pose2, Workspace, box, compose,
    convex_hull_distance, penetration, regular_polygon, relative_transform,
    world_points, wrap_angle,
)

finite_coord = st.floats(-10.0, 10.0, allow_nan=False)
any_angle = st.floats(-20.0, 20.0, allow_nan=False)
poses = st.builds(Pose2, finite_coord, finite_coord, any_angle)


def test_wrap_angle_range():
    for theta in (-10.0, -math.pi, 0.0, math.pi, 3.5, 123.0):
        w = wrap_angle(theta)
        assert -math.pi <= w < math.pi


def test_compose_identity():
    p = compose(Pose2(0, 0, 0), Pose2(1, 2, 0.3))
    assert (p.x, p.y) == (1, 2)
    assert p.theta == pytest.approx(0.3, abs=1e-15)


def test_compose_translation_adds():
    p = compose(Pose2(1, 0, 0), Pose2(0, 1, 0))
    assert (p.x, p.y, p.theta) == (1, 1, 0)


def test_compose_quarter_turn():
    p = compose(Pose2(0, 0, math.pi / 2), Pose2(1, 0, 0))
    assert abs(p.x) < 1e-12
    assert abs(p.y - 1) < 1e-12
    assert abs(p.theta - math.pi / 2) < 1e-12


def test_relative_transform_zero_motion():
    s = Pose2(0.4, -0.2, 1.1)
    d = relative_transform(s, s)
    assert math.hypot(d.x, d.y) < 1e-12 and abs(d.theta) < 1e-12


def test_relative_transform_pure_translation():
    d = relative_transform(Pose2(0, 0, 0), Pose2(0.1, 0, 0))
    assert abs(d.x - 0.1) < 1e-12 and abs(d.y) < 1e-12 and abs(d.theta) < 1e-12


def test_relative_transform_body_frame():
    # body-frame x of a pose rotated pi/2 points along world y
    d = relative_transform(Pose2(0, 0, math.pi / 2), Pose2(0, 0.1, math.pi / 2))
    assert abs(d.x - 0.1) < 1e-12 and abs(d.y) < 1e-12 and abs(d.theta) < 1e-12


@given(poses, poses)
@settings(max_examples=200)
def test_relative_transform_round_trip(a, b):
    d = relative_transform(a, b)
    back = compose(a, d)
    assert abs(back.x - b.x) < 1e-12
    assert abs(back.y - b.y) < 1e-12
    assert abs(wrap_angle(back.theta - b.theta)) < 1e-12


@given(poses)
@settings(max_examples=200)
def test_compose_with_inverse_is_identity(p):
    q = compose(p, p.inverse())
    assert math.hypot(q.x, q.y) < 1e-9
    assert abs(q.theta) < 1e-9


def test_polygon_rejects_cw_and_degenerate():
    with pytest.raises(ValueError):
        ConvexPolygon(((0, 0), (0, 1), (1, 0)))  # clockwise
    with pytest.raises(ValueError):
        ConvexPolygon(((0, 0), (1, 0)))


def test_box_radii():
    b = box(0.0254)
    assert abs(b.inradius - 0.0127) < 1e-12
    assert abs(b.circumradius - 0.0127 * math.sqrt(2)) < 1e-12


def test_circle_radii():
    c = Circle(0.03)
    assert c.circumradius == c.inradius == 0.03


def test_workspace_validation():
    with pytest.raises(ValueError):
        Workspace((0, 0), (0, 1))
    with pytest.raises(ValueError):
        Workspace((0, 0), (1, 1), boundary_margin=0.5)


def test_workspace_edge_distance_sign():
    ws = Workspace((-1, -1), (1, 1))
    assert ws.edge_distance((0, 0)) == 1.0
    assert ws.edge_distance((0.9, 0)) == pytest.approx(0.1)
    assert ws.edge_distance((1.1, 0)) < 0.0


def test_hull_distance_identical_sets():
    pts = [(0, 0), (1, 0), (0, 1)]
    assert convex_hull_distance(pts, pts) == 0.0


def test_hull_distance_two_squares():
    # 2.5 cm squares centered at (0,0) and (0.10,0): facing-edge gap
    a = world_points(box(0.025), Pose2(0, 0, 0))
    b = world_points(box(0.025), Pose2(0.10, 0, 0))
    assert convex_hull_distance(a, b) == pytest.approx(0.075, abs=1e-12)


def test_hull_distance_point_inside_square():
    square = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    assert convex_hull_distance(square, [(0.2, 0.3)]) == 0.0


def test_hull_distance_symmetric_and_interior_invariant():
    a = [(0, 0), (1, 0), (0, 1), (0.2, 0.2)]
    b = [(3, 0), (4, 0), (3, 1)]
    assert convex_hull_distance(a, b) == convex_hull_distance(b, a)
    assert convex_hull_distance(a + [(0.5, 0.25)], b) == pytest.approx(
        convex_hull_distance(a, b)
    )


def test_hull_distance_empty_input():
    with pytest.raises(ValueError):
        convex_hull_distance([], [(0, 0)])


def test_penetration_separated_circles():
    assert penetration(Circle(1), Pose2(0, 0), Circle(1), Pose2(3, 0)) is None


def test_penetration_circle_overlap_closed_form():
    pen = penetration(Circle(0.5), Pose2(0, 0), Circle(0.5), Pose2(0.8, 0))
    assert pen is not None
    assert pen.depth == pytest.approx(0.2, abs=1e-15)
    assert pen.axis == pytest.approx((1.0, 0.0))


def test_penetration_coincident_polygons():
    shape = box(0.1)
    pen = penetration(shape, Pose2(0, 0), shape, Pose2(0, 0))
    assert pen is not None and pen.depth > 0.0


def test_penetration_touching_returns_none():
    assert penetration(Circle(0.5), Pose2(0, 0), Circle(0.5), Pose2(1.0, 0)) is None


@given(
    st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), any_angle,
    st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), any_angle,
)
@settings(max_examples=200)
def test_penetration_symmetry(xa, ya, ta, xb, yb, tb):
    a, b = box(0.4), regular_polygon(5, 0.3)
    pa, pb = Pose2(xa, ya, ta), Pose2(xb, yb, tb)
    ab = penetration(a, pa, b, pb)
    ba = penetration(b, pb, a, pa)
    if ab is None:
        assert ba is None
        return
    assert ba is not None
    assert ab.depth == pytest.approx(ba.depth, abs=1e-9)
    # several axes may tie on depth, so the axes themselves need not be
    # anti-parallel; what must hold is that each reported translation
    # actually separates the pair
    shift = ab.depth + 1e-6
    pb2 = Pose2(pb.x + shift * ab.axis[0], pb.y + shift * ab.axis[1], tb)
    assert penetration(a, pa, b, pb2) is None
    shift = ba.depth + 1e-6
    pa2 = Pose2(pa.x + shift * ba.axis[0], pa.y + shift * ba.axis[1], ta)
    assert penetration(b, pb, a, pa2) is None


@given(
    st.floats(-1.0, 1.0), st.floats(-1.0, 1.0),
    st.floats(-1.0, 1.0), st.floats(-1.0, 1.0),
)
@settings(max_examples=200)
def test_circle_circle_matches_closed_form(xa, ya, xb, yb):
    ra, rb = 0.4, 0.7
    pen = penetration(Circle(ra), Pose2(xa, ya), Circle(rb), Pose2(xb, yb))
    expected = ra + rb - math.hypot(xb - xa, yb - ya)
    if expected <= 0.0:
        assert pen is None
    else:
        assert pen is not None
        assert pen.depth == pytest.approx(expected, abs=1e-12)


def test_penetration_axis_separates():
    # translating B by depth*axis must remove the overlap
    a, b = box(0.2), box(0.2)
    pa, pb = Pose2(0, 0, 0.3), Pose2(0.12, 0.05, -0.2)
    pen = penetration(a, pa, b, pb)
    assert pen is not None
    moved = Pose2(pb.x + pen.axis[0] * pen.depth,
                  pb.y + pen.axis[1] * pen.depth, pb.theta)
    after = penetration(a, pa, b, moved)
    assert after is None or after.depth < 1e-9
