"""Closed-loop realization of planned object trajectories with a pusher.

The push law is a proportional stand-in for a learned or model-based
pushing strategy: the pusher is placed behind the object relative to the
position error, with the placement angle biased to correct orientation
error, and pushes a fixed distance toward the target. Re-sensing after
every push closes the loop and absorbs model error.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Circle, Pose2, Shape, Workspace, penetration, wrap_angle
from .sim import Arrangement, SimParams, Trajectory, pusher_step
from .tasks import TaskSpec, goal_satisfied
from . import planner as planner_mod

Vec2 = tuple[float, float]

CONTACT_GAP = 0.002  # pusher standoff from the object's circumcircle
K_ALIGN = 0.8  # orientation-correction gain of the push law
ROTATION_TILT = 0.35  # inward tilt of tangential rotation pushes


@dataclass(frozen=True, slots=True)
class PushAction:
    """A push parameterized in the object's body frame: placement angle
    ``alpha``, push direction ``beta``, and push length."""

    alpha: float
    beta: float
    d_push: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))
        object.__setattr__(self, "beta", wrap_angle(self.beta))
        if self.d_push <= 0.0:
            raise ValueError("d_push must be positive")


@dataclass(frozen=True, slots=True)
class NoiseModel:
    actuation_sigma: float = 0.0  # fractional push length / direction jitter
    sensing_sigma_pos: float = 0.0  # meters
    sensing_sigma_theta: float = 0.0  # radians

    def __post_init__(self):
        if min(self.actuation_sigma, self.sensing_sigma_pos, self.sensing_sigma_theta) < 0.0:
            raise ValueError("noise sigmas must be nonnegative")


@dataclass(frozen=True, slots=True)
class Tolerances:
    eps_pos_final: float = 0.005
    eps_pos_mid: float = 0.015
    eps_theta_final: float = 0.1
    push_cap_per_waypoint: int = 80


def push_strategy(
    pose: Pose2, target: Pose2, shape: Shape,
    d_push: float = 0.01, k_align: float = K_ALIGN,
    pos_tol: float = 1e-9, theta_tol: float = 1e-9,
) -> PushAction | None:
    """Proportional push law toward a target pose; None when already there."""
    ex, ey = target.x - pose.x, target.y - pose.y
    err = math.hypot(ex, ey)
    theta_err = wrap_angle(target.theta - pose.theta)
    if err < pos_tol and abs(theta_err) < theta_tol:
        return None
    phi = math.atan2(ey, ex)
    correction = k_align * max(-math.pi / 4, min(math.pi / 4, theta_err))
    world_placement = phi + math.pi + correction
    return PushAction(
        alpha=world_placement - pose.theta,
        beta=phi - pose.theta,
        d_push=d_push,
    )


def rotation_push(
    pose: Pose2, shape: Shape, theta_err: float,
    ws: Workspace, d_push: float = 0.01,
) -> PushAction:
    """Tangential push that spins the object in place when only its
    orientation is off. The pusher grazes the circumcircle with a small
    inward tilt so it makes contact off-center."""
    side = 1.0 if theta_err > 0.0 else -1.0
    # prefer an anchor whose start position stays inside the workspace
    to_center = math.atan2(ws.center[1] - pose.y, ws.center[0] - pose.x)
    anchor = to_center + math.pi  # outside-facing side of the object
    for offset in (0.0, math.pi / 2, -math.pi / 2, math.pi):
        a = anchor + offset
        px = pose.x + 1.2 * shape.circumradius * math.cos(a)
        py = pose.y + 1.2 * shape.circumradius * math.sin(a)
        if ws.contains((px, py)):
            anchor = a
            break
    direction = anchor + side * (math.pi / 2 + ROTATION_TILT)
    return PushAction(alpha=anchor - pose.theta, beta=direction - pose.theta,
                      d_push=d_push)


def pusher_travel(shape: Shape, d_push: float, contact_gap: float = CONTACT_GAP) -> float:
    """Total pusher translation for one push: the commanded push length
    plus the worst-case approach slack between the circumcircle standoff
    and the actual surface."""
    return d_push + (shape.circumradius - shape.inradius) + contact_gap


def start_position(
    pose: Pose2, shape: Shape, action: PushAction,
    pusher_radius: float, contact_gap: float = CONTACT_GAP,
) -> Vec2:
    a = pose.theta + action.alpha
    r = shape.circumradius + pusher_radius + contact_gap
    return (pose.x + r * math.cos(a), pose.y + r * math.sin(a))


def world_direction(pose: Pose2, action: PushAction) -> Vec2:
    b = pose.theta + action.beta
    return (math.cos(b), math.sin(b))


def occluded(
    p: Vec2, arr: Arrangement, i: int, ws: Workspace, pusher_radius: float,
    reach_slack: float = 0.0,
) -> bool:
    """A pusher disc at ``p`` cannot be placed: outside the workspace or
    overlapping any object other than ``i``. ``reach_slack`` widens the
    reachable region beyond the workspace bounds (the arm can overhang the
    edge a little, which matters when rescuing objects stuck at the wall)."""
    if not (
        ws.min[0] - reach_slack <= p[0] <= ws.max[0] + reach_slack
        and ws.min[1] - reach_slack <= p[1] <= ws.max[1] + reach_slack
    ):
        return True
    disc = Circle(pusher_radius)
    pose = Pose2(p[0], p[1], 0.0)
    for j in range(arr.n):
        if j == i:
            continue
        if penetration(arr.shapes[j], arr.poses[j], disc, pose) is not None:
            return True
    return False


def sense_pose(pose: Pose2, noise: NoiseModel, rng: np.random.Generator) -> Pose2:
    if noise.sensing_sigma_pos == 0.0 and noise.sensing_sigma_theta == 0.0:
        return pose
    return Pose2(
        pose.x + rng.normal(0.0, noise.sensing_sigma_pos),
        pose.y + rng.normal(0.0, noise.sensing_sigma_pos),
        pose.theta + rng.normal(0.0, noise.sensing_sigma_theta),
    )


def sense_arrangement(arr: Arrangement, noise: NoiseModel,
                      rng: np.random.Generator) -> Arrangement:
    if noise.sensing_sigma_pos == 0.0 and noise.sensing_sigma_theta == 0.0:
        return arr
    return replace(arr, poses=tuple(sense_pose(p, noise, rng) for p in arr.poses))


# placement-angle perturbations tried, in order, when the nominal pusher
# start is occluded; 0 first so the unobstructed case is unchanged
_PLACEMENT_OFFSETS = (0.0, 0.15, -0.15, 0.3, -0.3, 0.45, -0.45, 0.6, -0.6, 0.9, -0.9)


def find_clear_start(
    sensed: Pose2, shape: Shape, action: PushAction, arr: Arrangement,
    i: int, ws: Workspace, pusher_radius: float, reach_slack: float = 0.0,
) -> tuple[PushAction, Vec2] | None:
    """Place the pusher at the commanded angle, or the nearest perturbed
    angle whose start position is not occluded; None when all are blocked."""
    for offset in _PLACEMENT_OFFSETS:
        candidate = action if offset == 0.0 else PushAction(
            action.alpha + offset, action.beta, action.d_push
        )
        start = start_position(sensed, shape, candidate, pusher_radius)
        if not occluded(start, arr, i, ws, pusher_radius, reach_slack):
            return candidate, start
    return None


@dataclass
class ExecutionOutcome:
    arrangement: Arrangement
    pushes: int
    completed: bool
    skip_reason: str | None = None


def execute_trajectory(
    arr: Arrangement,
    i: int,
    traj: Trajectory,
    noise: NoiseModel,
    sim_params: SimParams,
    ws: Workspace,
    tol: Tolerances,
    rng: np.random.Generator,
    d_push: float = 0.01,
    push_budget: int | None = None,
    on_push=None,
    reach_slack: float = 0.0,
) -> ExecutionOutcome:
    """Push object ``i`` waypoint by waypoint, re-sensing after each push.

    Occlusion of any push's start position skips the rest of the
    trajectory (stricter than checking only the first push). A per-waypoint
    push cap bounds the effort; exhausting it skips the remainder too.
    The trajectory is also abandoned when a bystander object gets shoved
    toward the workspace edge, before it ends up somewhere the pusher can
    no longer reach behind it.
    """
    if not traj:
        raise ValueError("trajectory must be nonempty")
    shape = arr.shapes[i]
    pushes = 0
    first_push = True
    # bystanders pushed below this edge clearance abort the trajectory;
    # only newly endangered objects count, so rescue pushes aimed at an
    # already-stuck object are not self-aborting
    danger = 0.75 * ws.boundary_margin
    endangered_at_start = frozenset(
        j for j, p in enumerate(arr.poses)
        if ws.edge_distance((p.x, p.y)) < danger
    )
    for k, wp in enumerate(traj):
        final = k == len(traj) - 1
        eps_p = tol.eps_pos_final if final else tol.eps_pos_mid
        eps_t = tol.eps_theta_final if final else None
        waypoint_pushes = 0
        while True:
            sensed = sense_pose(arr.poses[i], noise, rng)
            pos_err = math.hypot(wp.x - sensed.x, wp.y - sensed.y)
            theta_err = wrap_angle(wp.theta - sensed.theta)
            if pos_err <= eps_p and (eps_t is None or abs(theta_err) <= eps_t):
                break
            if waypoint_pushes >= tol.push_cap_per_waypoint:
                return ExecutionOutcome(arr, pushes, False, "push cap reached")
            if push_budget is not None and pushes >= push_budget:
                return ExecutionOutcome(arr, pushes, False, "push budget exhausted")
            if pos_err > eps_p:
                # shorten the final approach to avoid overshoot oscillation
                step = min(d_push, max(pos_err, 0.002))
                action = push_strategy(sensed, wp, shape, d_push=step)
            else:
                action = rotation_push(sensed, shape, theta_err, ws, d_push=d_push)
            placed = find_clear_start(sensed, shape, action, arr, i, ws,
                                      sim_params.pusher_radius, reach_slack)
            if placed is None:
                reason = "start occluded" if first_push else "push blocked mid-trajectory"
                return ExecutionOutcome(arr, pushes, False, reason)
            action, start = placed
            ux, uy = world_direction(sensed, action)
            dist = pusher_travel(shape, action.d_push)
            if noise.actuation_sigma > 0.0:
                dist *= max(0.1, 1.0 + rng.normal(0.0, noise.actuation_sigma))
                jitter = rng.normal(0.0, noise.actuation_sigma)
                c, s = math.cos(jitter), math.sin(jitter)
                ux, uy = c * ux - s * uy, s * ux + c * uy
            result = pusher_step(arr, start, (ux, uy), dist, ws, sim_params)
            arr = result.arrangement
            pushes += 1
            waypoint_pushes += 1
            first_push = False
            if on_push is not None:
                on_push(arr, i, start, (ux, uy), dist)
            if danger > 0.0:
                for j, p in enumerate(arr.poses):
                    if j == i or j in endangered_at_start:
                        continue
                    if ws.edge_distance((p.x, p.y)) < danger:
                        return ExecutionOutcome(arr, pushes, False,
                                                "bystander near boundary")
    return ExecutionOutcome(arr, pushes, True)


@dataclass(frozen=True, slots=True)
class Budgets:
    max_pushes: int = 500
    max_cycles: int = 200
    max_wall_s: float | None = None


@dataclass
class LoopResult:
    success: bool
    arrangement: Arrangement
    pushes: int
    num_actions: int
    planning_time_s: float
    wall_time_s: float
    skipped: list[tuple[int, str]] = field(default_factory=list)


def _boundary_guard(
    arr: Arrangement, ws: Workspace, noise: NoiseModel, sim_params: SimParams,
    tol: Tolerances, rng: np.random.Generator, d_push: float,
    push_budget: int, on_push=None,
) -> tuple[Arrangement, int]:
    """Push any object inside the out-of-bounds margin back toward the
    workspace center until it clears the margin."""
    margin = ws.boundary_margin
    if margin <= 0.0:
        return arr, 0
    total = 0
    cx, cy = ws.center
    for j in range(arr.n):
        attempts = 0
        while attempts < 3 and total < push_budget:
            p = arr.poses[j]
            slack = margin - ws.edge_distance((p.x, p.y))
            if slack <= 0.0:
                break
            d = math.hypot(cx - p.x, cy - p.y)
            if d < 1e-9:
                break
            step = slack + 0.01
            target = Pose2(p.x + (cx - p.x) / d * step, p.y + (cy - p.y) / d * step,
                           p.theta)
            guard_tol = Tolerances(
                eps_pos_final=0.01, eps_pos_mid=0.01,
                eps_theta_final=math.pi,  # orientation is not corrected here
                push_cap_per_waypoint=30,
            )
            out = execute_trajectory(
                arr, j, [target], noise, sim_params, ws, guard_tol, rng,
                d_push=d_push, push_budget=push_budget - total, on_push=on_push,
                reach_slack=margin,  # the arm may overhang the edge to rescue
            )
            arr = out.arrangement
            total += out.pushes
            attempts += 1
            if out.skip_reason in ("start occluded", "push blocked mid-trajectory"):
                break
    return arr, total


def rearrange_loop(
    arr0: Arrangement,
    spec: TaskSpec,
    ws: Workspace,
    planner_config: "planner_mod.PlannerConfig",
    sim_params: SimParams,
    noise: NoiseModel,
    tol: Tolerances,
    budgets: Budgets,
    rng: np.random.Generator,
    d_push: float = 0.01,
    trace=None,
) -> LoopResult:
    """Interleave planning and closed-loop execution until the goal
    criterion holds on the sensed arrangement or the budget runs out."""
    arr = arr0
    pushes = 0
    actions = 0
    planning_time = 0.0
    skipped: list[tuple[int, str]] = []
    t_start = time.perf_counter()

    def emit(event: str, **fields):
        if trace is not None:
            trace.emit(event, step=pushes, **fields)

    def on_push(a, i, start, direction, dist):
        nonlocal pushes
        pushes += 1
        if trace is not None:
            trace.emit(
                "push", step=pushes, obj=i,
                pusher=[round(start[0], 6), round(start[1], 6)],
                direction=[round(direction[0], 6), round(direction[1], 6)],
                distance=round(dist, 6),
                poses=[[p.x, p.y, p.theta] for p in a.poses],
            )

    success = False
    stalled_cycles = 0
    for _cycle in range(budgets.max_cycles):
        sensed = sense_arrangement(arr, noise, rng)
        emit("observe", poses=[[p.x, p.y, p.theta] for p in sensed.poses])
        if goal_satisfied(spec, sensed):
            success = True
            break
        if pushes >= budgets.max_pushes:
            break
        if budgets.max_wall_s is not None and time.perf_counter() - t_start > budgets.max_wall_s:
            break
        emit("plan_start")
        t0 = time.perf_counter()
        plan = planner_mod.ocp_plan(sensed, spec, planner_config, ws, sim_params, rng)
        planning_time += time.perf_counter() - t0
        emit("plan_end", num_steps=len(plan), plan=[
            {"obj": i, "waypoints": [[w.x, w.y, w.theta] for w in traj]}
            for i, traj in plan
        ])
        pushes_before_cycle = pushes
        for i, traj in plan:
            outcome = execute_trajectory(
                arr, i, traj, noise, sim_params, ws, tol, rng,
                d_push=d_push, push_budget=budgets.max_pushes - pushes,
                on_push=on_push,
            )
            arr = outcome.arrangement
            actions += 1
            if outcome.skip_reason is not None:
                skipped.append((i, outcome.skip_reason))
            n_guard_before = pushes
            arr, _ = _boundary_guard(
                arr, ws, noise, sim_params, tol, rng, d_push,
                push_budget=budgets.max_pushes - pushes, on_push=on_push,
            )
            if pushes > n_guard_before:
                emit("boundary_guard", pushes=pushes - n_guard_before)
            if pushes >= budgets.max_pushes:
                break
        if pushes == pushes_before_cycle:
            # replanning without any executable push; give up after a few
            # consecutive dead cycles rather than spinning out the budget
            stalled_cycles += 1
            if stalled_cycles >= 10:
                break
        else:
            stalled_cycles = 0
    emit("done", success=success)
    return LoopResult(
        success=success,
        arrangement=arr,
        pushes=pushes,
        num_actions=actions,
        planning_time_s=planning_time,
        wall_time_s=time.perf_counter() - t_start,
        skipped=skipped,
    )
