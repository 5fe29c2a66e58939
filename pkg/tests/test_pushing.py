import math

import numpy as np
import pytest

from pushplan.geometry import Circle, Pose2, Workspace, box
from pushplan.planner import PlannerConfig
from pushplan.pushing import (
    Budgets, NoiseModel, PushAction, Tolerances, execute_trajectory,
    find_clear_start, occluded, push_strategy, pusher_travel, rearrange_loop,
    rotation_push, sense_arrangement, start_position, world_direction,
)
from pushplan.sim import Arrangement, SimParams
from pushplan.tasks import GoalRegion, GoalRegionsTask

WS = Workspace((-0.3, -0.3), (0.3, 0.3), boundary_margin=0.02)
CUBE = box(0.0254)


def lone_cube(x=0.0, y=0.0, theta=0.0):
    return Arrangement(poses=(Pose2(x, y, theta),), shapes=(CUBE,), classes=(1,))


def test_push_action_normalizes_angles():
    a = PushAction(alpha=4.0, beta=-4.0, d_push=0.01)
    assert -math.pi <= a.alpha < math.pi
    assert -math.pi <= a.beta < math.pi
    with pytest.raises(ValueError):
        PushAction(0, 0, 0.0)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(actuation_sigma=-0.1)


def test_push_strategy_straight_ahead():
    action = push_strategy(Pose2(0, 0, 0), Pose2(0.1, 0, 0), CUBE)
    assert action.alpha == pytest.approx(-math.pi, abs=1e-9)  # directly behind
    assert action.beta == pytest.approx(0.0, abs=1e-12)       # push along +x
    start = start_position(Pose2(0, 0, 0), CUBE, action, pusher_radius=0.005)
    assert start[0] < -CUBE.circumradius
    assert start[1] == pytest.approx(0.0, abs=1e-12)
    assert world_direction(Pose2(0, 0, 0), action) == pytest.approx((1.0, 0.0))


def test_push_strategy_orientation_clamp():
    # big positive theta error saturates the +-pi/4 placement correction
    action = push_strategy(Pose2(0, 0, 0), Pose2(0.1, 0, 2.0), CUBE, k_align=1.0)
    assert action.alpha == pytest.approx(-math.pi + math.pi / 4, abs=1e-9)


def test_push_strategy_none_when_at_target():
    assert push_strategy(Pose2(0, 0, 0), Pose2(0, 0, 0), CUBE) is None


def test_pusher_travel_covers_approach_slack():
    travel = pusher_travel(CUBE, 0.01)
    assert travel == pytest.approx(0.01 + (CUBE.circumradius - CUBE.inradius) + 0.002)
    circle = Circle(0.02)
    assert pusher_travel(circle, 0.01) == pytest.approx(0.012)


def test_occluded_cases():
    arr = Arrangement(
        poses=(Pose2(0, 0, 0), Pose2(0.1, 0, 0)),
        shapes=(CUBE, CUBE), classes=(1, 1),
    )
    assert not occluded((0.2, 0.2), arr, 0, WS, 0.005)
    assert occluded((0.1, 0.0), arr, 0, WS, 0.005)      # inside the neighbor
    assert occluded((0.31, 0.0), arr, 0, WS, 0.005)     # outside the workspace
    assert not occluded((0.0, 0.0), arr, 0, WS, 0.005)  # own body ignored


def test_occluded_reach_slack_extends_bounds():
    arr = lone_cube()
    assert occluded((0.31, 0.0), arr, 0, WS, 0.005)
    assert not occluded((0.31, 0.0), arr, 0, WS, 0.005, reach_slack=0.02)


def test_find_clear_start_perturbs_placement():
    # neighbor sits exactly where the nominal start would go
    behind = start_position(Pose2(0, 0, 0), CUBE, PushAction(-math.pi, 0, 0.01), 0.005)
    arr = Arrangement(
        poses=(Pose2(0, 0, 0), Pose2(behind[0], behind[1], 0)),
        shapes=(CUBE, CUBE), classes=(1, 1),
    )
    action = PushAction(-math.pi, 0, 0.01)
    placed = find_clear_start(arr.poses[0], CUBE, action, arr, 0, WS, 0.005)
    assert placed is not None
    perturbed, start = placed
    assert perturbed.alpha != action.alpha
    assert not occluded(start, arr, 0, WS, 0.005)


def test_rotation_push_grazes_circumcircle():
    action = rotation_push(Pose2(0, 0, 0), CUBE, theta_err=0.5, ws=WS)
    start = start_position(Pose2(0, 0, 0), CUBE, action, 0.005)
    assert WS.contains(start)


def test_execute_zero_pushes_when_within_tolerance():
    arr = lone_cube()
    out = execute_trajectory(
        arr, 0, [Pose2(0.001, 0.0, 0.0)], NoiseModel(), SimParams(), WS,
        Tolerances(), np.random.default_rng(0),
    )
    assert out.pushes == 0 and out.completed


def test_execute_skips_when_start_occluded():
    # a tight ring of neighbors blocks every placement angle
    ring = [
        Pose2(0.032 * math.cos(a), 0.032 * math.sin(a), 0.0)
        for a in np.linspace(0, 2 * math.pi, 12, endpoint=False)
    ]
    arr = Arrangement(
        poses=(Pose2(0, 0, 0), *ring),
        shapes=tuple([CUBE] * 13), classes=tuple([1] * 13),
    )
    out = execute_trajectory(
        arr, 0, [Pose2(0.1, 0.0, 0.0)], NoiseModel(), SimParams(), WS,
        Tolerances(), np.random.default_rng(0),
    )
    assert out.pushes == 0
    assert not out.completed
    assert out.skip_reason == "start occluded"
    assert out.arrangement.poses == arr.poses


def test_execute_reaches_waypoint_zero_noise():
    arr = lone_cube(-0.05, 0.02)
    target = Pose2(0.08, -0.03, 0.0)
    tol = Tolerances()
    out = execute_trajectory(
        arr, 0, [target], NoiseModel(), SimParams(), WS, tol,
        np.random.default_rng(1),
    )
    assert out.completed
    p = out.arrangement.poses[0]
    assert math.hypot(p.x - target.x, p.y - target.y) <= tol.eps_pos_final
    assert abs(p.theta - target.theta) <= tol.eps_theta_final


def test_execute_push_count_near_ideal():
    # 10 cm straight run: pushes within 2x of distance / d_push
    arr = lone_cube(-0.05, 0.0)
    out = execute_trajectory(
        arr, 0, [Pose2(0.05, 0.0, 0.0)], NoiseModel(), SimParams(), WS,
        Tolerances(), np.random.default_rng(2), d_push=0.01,
    )
    assert out.completed
    assert out.pushes <= 2 * 10


def test_execute_deterministic_without_noise():
    arr = lone_cube(-0.05, 0.01)
    runs = []
    for _ in range(2):
        out = execute_trajectory(
            arr, 0, [Pose2(0.06, -0.02, 0.4)], NoiseModel(), SimParams(), WS,
            Tolerances(), np.random.default_rng(3),
        )
        runs.append(out.arrangement.poses)
    assert runs[0] == runs[1]


def test_execute_aborts_when_bystander_nears_boundary():
    # pushing the first cube drives the second toward the +x wall
    arr = Arrangement(
        poses=(Pose2(0.22, 0.0, 0.0), Pose2(0.26, 0.0, 0.0)),
        shapes=(CUBE, CUBE), classes=(1, 1),
    )
    out = execute_trajectory(
        arr, 0, [Pose2(0.27, 0.0, 0.0)], NoiseModel(), SimParams(), WS,
        Tolerances(), np.random.default_rng(4),
    )
    assert not out.completed
    assert out.skip_reason == "bystander near boundary"
    # nothing may leave the workspace
    for p in out.arrangement.poses:
        assert WS.contains((p.x, p.y))


def test_sense_arrangement_noise_free_is_identity():
    arr = lone_cube()
    assert sense_arrangement(arr, NoiseModel(), np.random.default_rng(0)) is arr


def test_sense_arrangement_applies_noise():
    arr = lone_cube()
    noisy = sense_arrangement(
        arr, NoiseModel(sensing_sigma_pos=0.01), np.random.default_rng(5)
    )
    assert noisy.poses != arr.poses


def simple_loop(seed, noise=NoiseModel(), budgets=Budgets(max_pushes=200)):
    arr = lone_cube(-0.1, -0.1)
    task = GoalRegionsTask((GoalRegion((0.1, 0.1), 0.04),))
    return rearrange_loop(
        arr, task, WS, PlannerConfig(s_max=20), SimParams(), noise,
        Tolerances(), budgets, np.random.default_rng(seed),
    )


def test_loop_zero_actions_when_satisfied():
    arr = lone_cube()
    task = GoalRegionsTask((GoalRegion((0, 0), 0.05),))
    res = rearrange_loop(
        arr, task, WS, PlannerConfig(), SimParams(), NoiseModel(), Tolerances(),
        Budgets(), np.random.default_rng(0),
    )
    assert res.success and res.num_actions == 0 and res.pushes == 0


def test_loop_single_object_succeeds():
    assert all(simple_loop(seed).success for seed in range(10))


def test_loop_noise_robustness_paired_seeds():
    clean = sum(simple_loop(s).success for s in range(20))
    noisy = sum(
        simple_loop(s, noise=NoiseModel(actuation_sigma=0.1)).success
        for s in range(20)
    )
    assert noisy >= clean - 3  # <= 15 points degradation on paired seeds


def test_loop_respects_push_budget():
    res = simple_loop(0, budgets=Budgets(max_pushes=5))
    assert res.pushes <= 5 + 1  # the in-flight push may complete


def test_loop_boundary_guard_postcondition():
    res = simple_loop(1)
    assert res.success
    for p in res.arrangement.poses:
        assert WS.edge_distance((p.x, p.y)) >= WS.boundary_margin - 1e-9


def test_loop_planning_time_excludes_execution():
    res = simple_loop(2)
    assert 0.0 <= res.planning_time_s <= res.wall_time_s
