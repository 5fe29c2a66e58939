import itertools
import math

import numpy as np
import pytest

from pushplan.geometry import Pose2, Workspace, box
from pushplan.sim import Arrangement
from pushplan.tasks import (
    GoalRegion, GoalRegionsTask, GradientParams, SortNoGoals, assign_goals,
    effective_regions, goal_satisfied, heuristic, heuristic_gradient,
)

WS = Workspace((-0.165, -0.15), (0.165, 0.15), boundary_margin=0.02)
CUBE = box(0.0254)


def arrangement(positions, classes=None, theta=0.0):
    n = len(positions)
    return Arrangement(
        poses=tuple(Pose2(x, y, theta) for x, y in positions),
        shapes=tuple(CUBE for _ in range(n)),
        classes=tuple(classes or [1] * n),
    )


# --- goal criteria ----------------------------------------------------------


def test_goal_regions_satisfied_at_centers():
    task = GoalRegionsTask((GoalRegion((0.05, 0), 0.03), GoalRegion((-0.05, 0), 0.03)))
    arr = arrangement([(0.05, 0), (-0.05, 0)])
    assert goal_satisfied(task, arr)


def test_goal_regions_boundary_counts_as_inside():
    task = GoalRegionsTask((GoalRegion((0, 0), 0.03),))
    assert goal_satisfied(task, arrangement([(0.03, 0)]))
    assert not goal_satisfied(task, arrangement([(0.0301, 0)]))


def test_sort_intersecting_hulls_not_satisfied():
    task = SortNoGoals(num_classes=2, separation_threshold=0.05)
    arr = arrangement([(0, 0), (0.01, 0)], classes=[1, 2])
    assert not goal_satisfied(task, arr)


def test_sort_gap_above_threshold_satisfied():
    # facing-edge gap between 2.54 cm cube classes: 0.1 - 0.0254 = 0.0746
    task = SortNoGoals(num_classes=2, separation_threshold=0.05)
    arr = arrangement([(-0.05, 0), (0.05, 0)], classes=[1, 2])
    assert goal_satisfied(task, arr)
    tight = SortNoGoals(num_classes=2, separation_threshold=0.08)
    assert not goal_satisfied(tight, arr)


def test_goal_satisfied_invariant_under_group_relabel():
    regions = (GoalRegion((0.05, 0), 0.02), GoalRegion((-0.05, 0), 0.02))
    task = GoalRegionsTask(regions, interchange_groups=((0, 1),))
    # objects sit on each other's nominal regions; assignment fixes it
    arr = arrangement([(-0.05, 0), (0.05, 0)])
    assert goal_satisfied(task, arr)


def test_interchange_group_requires_distinct_regions():
    regions = (GoalRegion((0, 0), 0.02), GoalRegion((0, 0), 0.02))
    with pytest.raises(ValueError):
        GoalRegionsTask(regions, interchange_groups=((0, 1),))


# --- heuristic --------------------------------------------------------------


def test_heuristic_zero_inside_regions():
    task = GoalRegionsTask((GoalRegion((0.02, 0.01), 0.05),))
    assert heuristic(task, arrangement([(0.03, 0.02)])) == 0.0


def test_heuristic_unit_value_at_one_radius():
    task = GoalRegionsTask((GoalRegion((0, 0), 0.05),))
    h = heuristic(task, arrangement([(0.05 + 1e-12, 0)]))
    assert h == pytest.approx(1.0, abs=1e-6)


def test_heuristic_quadratic_scaling():
    task = GoalRegionsTask((GoalRegion((0, 0), 0.05),))
    h = heuristic(task, arrangement([(0.10, 0)]))
    assert h == pytest.approx(4.0, abs=1e-12)


def test_heuristic_nonnegative_random():
    rng = np.random.default_rng(1)
    task = SortNoGoals.for_workspace(WS, 3)
    for _ in range(50):
        pts = [(rng.uniform(-0.15, 0.15), rng.uniform(-0.13, 0.13)) for _ in range(6)]
        arr = arrangement(pts, classes=[1, 1, 2, 2, 3, 3])
        assert heuristic(task, arr) >= 0.0


def test_heuristic_translation_invariance():
    regions = tuple(GoalRegion((x, y), 0.02) for x, y in [(0.05, 0.02), (-0.04, -0.03)])
    task = GoalRegionsTask(regions)
    pts = [(0.09, 0.0), (0.01, -0.08)]
    h0 = heuristic(task, arrangement(pts))
    shift = (0.013, -0.007)
    shifted_regions = tuple(
        GoalRegion((r.center[0] + shift[0], r.center[1] + shift[1]), r.radius)
        for r in regions
    )
    h1 = heuristic(
        GoalRegionsTask(shifted_regions),
        arrangement([(x + shift[0], y + shift[1]) for x, y in pts]),
    )
    assert h1 == pytest.approx(h0, abs=1e-12)


def test_sort_heuristic_decreases_toward_centroid():
    task = SortNoGoals.for_workspace(WS, 2)
    pts = [(0.0, 0.0), (0.04, 0.0), (0.1, 0.1), (-0.1, -0.1)]
    classes = [1, 1, 2, 2]
    base = heuristic(task, arrangement(pts, classes))
    # move the first object toward its class centroid
    closer = [(0.01, 0.0)] + pts[1:]
    assert heuristic(task, arrangement(closer, classes)) < base


# --- gradients --------------------------------------------------------------


def test_gradient_zero_inside_region():
    task = GoalRegionsTask((GoalRegion((0, 0), 0.05),))
    g = heuristic_gradient(task, arrangement([(0.01, 0.01)]))
    assert g[0] == (0.0, 0.0, 0.0)


def test_gradient_matches_analytic_quadratic():
    task = GoalRegionsTask((GoalRegion((0, 0), 0.05),))
    g = heuristic_gradient(task, arrangement([(0.10, 0.0)]))
    assert g[0][0] == pytest.approx(2 * 0.10 / 0.05**2, rel=1e-4)  # = 80
    assert g[0][1] == pytest.approx(0.0, abs=1e-6)
    assert g[0][2] == 0.0


def test_gradient_richardson_consistency():
    rng = np.random.default_rng(7)
    task = SortNoGoals.for_workspace(WS, 2)
    pts = [(rng.uniform(-0.1, 0.1), rng.uniform(-0.09, 0.09)) for _ in range(6)]
    arr = arrangement(pts, classes=[1, 1, 1, 2, 2, 2])
    delta = 1e-3
    g1 = np.array(heuristic_gradient(task, arr, GradientParams(fd_step_pos=delta)))
    g2 = np.array(heuristic_gradient(task, arr, GradientParams(fd_step_pos=delta / 2)))
    richardson = (4 * g2 - g1) / 3
    scale = np.abs(richardson).max()
    assert np.abs(g2 - richardson).max() <= 1e-5 * scale


def test_gradient_params_validation():
    with pytest.raises(ValueError):
        GradientParams(fd_step_pos=0.0)


# --- assignment -------------------------------------------------------------


def test_assign_singleton():
    assert assign_goals([(0, 0)], [GoalRegion((1, 1), 0.1)]) == [0]


def test_assign_on_center_positions():
    regions = [GoalRegion((0, 0), 0.1), GoalRegion((1, 0), 0.1)]
    assert assign_goals([(0, 0), (1, 0)], regions) == [0, 1]
    assert assign_goals([(1, 0), (0, 0)], regions) == [1, 0]


def test_assign_size_mismatch():
    with pytest.raises(ValueError):
        assign_goals([(0, 0)], [])


def test_assign_matches_permutation_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = 6
        pts = [(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(n)]
        regions = [GoalRegion((rng.uniform(0, 1), rng.uniform(0, 1)), 0.05)
                   for _ in range(n)]

        def cost(assign):
            return sum(
                math.hypot(p[0] - regions[a].center[0], p[1] - regions[a].center[1])
                for p, a in zip(pts, assign)
            )

        got = assign_goals(pts, regions)
        best = min(cost(perm) for perm in itertools.permutations(range(n)))
        assert cost(got) == pytest.approx(best, abs=1e-12)


def test_effective_regions_resolves_groups():
    regions = (GoalRegion((0.05, 0), 0.02), GoalRegion((-0.05, 0), 0.02))
    task = GoalRegionsTask(regions, interchange_groups=((0, 1),))
    eff = effective_regions(task, [(-0.06, 0), (0.06, 0)])
    assert eff[0].center == (-0.05, 0)
    assert eff[1].center == (0.05, 0)
