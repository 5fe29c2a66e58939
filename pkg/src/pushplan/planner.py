"""Sampling-based tree search over object arrangements.

The tree grows by repeatedly picking a node (inversely weighted by how
much it has been expanded), picking an object to activate (weighted by a
Gaussian mixture over heuristic-gradient magnitudes), and simulating a
candidate trajectory for that object: either a random straight-line
motion (Mode I) or a goal-oriented soft-A* path (Mode II). The best node
found is backtraced into an ordered list of object-trajectory actions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose2, Workspace
from .sim import Arrangement, SimParams, Trajectory, simulate_trajectory
from .softastar import build_grid, default_params, find_goal_cell, path_to_trajectory, soft_astar
from .tasks import GradientParams, TaskSpec, goal_satisfied, heuristic, heuristic_gradient
from . import pushing


@dataclass
class TreeNode:
    arrangement: Arrangement
    depth: int = 0
    parent: int | None = None
    incoming_edge: tuple[int, Trajectory] | None = None
    child_count: int = 0
    mode2_explored: set[int] = field(default_factory=set)
    # lazily computed per-node caches; arrangements are immutable so these
    # never go stale
    grads: list[tuple[float, float, float]] | None = None
    scores: list[float] | None = None


@dataclass
class PlanTree:
    nodes: list[TreeNode]

    @classmethod
    def rooted(cls, arr: Arrangement) -> "PlanTree":
        return cls(nodes=[TreeNode(arrangement=arr)])

    def add_child(self, parent: int, arr: Arrangement, edge: tuple[int, Trajectory]) -> int:
        node = TreeNode(
            arrangement=arr,
            depth=self.nodes[parent].depth + 1,
            parent=parent,
            incoming_edge=edge,
        )
        self.nodes.append(node)
        self.nodes[parent].child_count += 1
        return len(self.nodes) - 1

    def backtrace(self, node_id: int) -> list[tuple[int, Trajectory]]:
        plan: list[tuple[int, Trajectory]] = []
        node = self.nodes[node_id]
        while node.parent is not None:
            plan.append(node.incoming_edge)
            node = self.nodes[node.parent]
        plan.reverse()
        return plan


@dataclass(frozen=True)
class PlannerConfig:
    s_max: int = 50
    d_max: int = 5
    p_astar: float = 0.5
    epsilon: float = 0.2
    l_min: float | None = None  # None: 0.05 x workspace width
    l_max: float | None = None  # None: 0.25 x workspace width
    sigma: float | None = None  # None: 2 x mean object circumdiameter
    stretch_k: float = 2.0
    mode1_enabled: bool = True  # off: Mode II only, no straight-line fallback
    hard_astar: bool = False  # treat every nonzero grid value as blocked
    attempt_factor: int = 10  # expansion attempts allowed per tree slot

    def __post_init__(self):
        if self.s_max < 1 or self.d_max < 1:
            raise ValueError("s_max and d_max must be positive")
        if not (0.0 <= self.p_astar <= 1.0 and 0.0 <= self.epsilon <= 1.0):
            raise ValueError("p_astar and epsilon must lie in [0, 1]")
        if self.stretch_k < 1.0:
            raise ValueError("stretch_k must be >= 1")

    def length_range(self, ws: Workspace) -> tuple[float, float]:
        l_min = self.l_min if self.l_min is not None else 0.05 * ws.width
        l_max = self.l_max if self.l_max is not None else 0.25 * ws.width
        if not (0.0 < l_min < l_max):
            raise ValueError("require 0 < l_min < l_max")
        return l_min, l_max

    def kernel_sigma(self, arr: Arrangement) -> float:
        if self.sigma is not None:
            return self.sigma
        return 2.0 * sum(2.0 * s.circumradius for s in arr.shapes) / arr.n


def node_weights(tree: PlanTree, d_max: int) -> list[float]:
    return [
        1.0 / (n.child_count + 1) if n.depth < d_max else 0.0
        for n in tree.nodes
    ]


def sample_node(tree: PlanTree, d_max: int, rng: np.random.Generator) -> int | None:
    """Draw a node id with probability proportional to its weight; None
    when every node sits at the depth limit."""
    weights = node_weights(tree, d_max)
    total = sum(weights)
    if total <= 0.0:
        return None
    r = rng.uniform(0.0, total)
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    return len(weights) - 1


def gradient_magnitudes(
    spec: TaskSpec, arr: Arrangement, grad_params: GradientParams = GradientParams()
) -> list[float]:
    """Euclidean norms of the per-object heuristic gradients, with the
    angular component converted to a positional scale via the object's
    circumradius."""
    grads = heuristic_gradient(spec, arr, grad_params)
    mags = []
    for (gx, gy, gt), shape in zip(grads, arr.shapes):
        gt_scaled = gt / shape.circumradius
        mags.append(math.sqrt(gx * gx + gy * gy + gt_scaled * gt_scaled))
    return mags


def _magnitudes_from_grads(grads, shapes) -> list[float]:
    mags = []
    for (gx, gy, gt), shape in zip(grads, shapes):
        gt_scaled = gt / shape.circumradius
        mags.append(math.sqrt(gx * gx + gy * gy + gt_scaled * gt_scaled))
    return mags


def _scores_from_magnitudes(mags, positions, sigma: float, k: float) -> list[float]:
    f = [m**k for m in mags]
    n = len(mags)
    scores = []
    for i in range(n):
        s = f[i]
        xi, yi = positions[i]
        for j in range(n):
            if j == i:
                continue
            d2 = (positions[j][0] - xi) ** 2 + (positions[j][1] - yi) ** 2
            s += f[j] * math.exp(-d2 / (2.0 * sigma * sigma))
        scores.append(s)
    return scores


def activation_scores(
    spec: TaskSpec, arr: Arrangement, sigma: float, k: float,
    grad_params: GradientParams = GradientParams(),
) -> list[float]:
    """Gaussian-mixture activation score per object: its own stretched
    gradient magnitude plus neighbors' magnitudes damped by distance."""
    mags = gradient_magnitudes(spec, arr, grad_params)
    return _scores_from_magnitudes(mags, arr.positions(), sigma, k)


def _sample_from_scores(scores: list[float], rng: np.random.Generator) -> int:
    total = sum(scores)
    if total <= 0.0:
        return int(rng.integers(len(scores)))  # flat heuristic: uniform fallback
    r = rng.uniform(0.0, total)
    acc = 0.0
    for i, s in enumerate(scores):
        acc += s
        if r < acc:
            return i
    return len(scores) - 1


def activate_object(
    spec: TaskSpec, arr: Arrangement, sigma: float, k: float,
    rng: np.random.Generator, grad_params: GradientParams = GradientParams(),
) -> int:
    return _sample_from_scores(
        activation_scores(spec, arr, sigma, k, grad_params), rng
    )


def mode1_trajectory(
    arr: Arrangement, i: int, spec: TaskSpec, config: PlannerConfig,
    ws: Workspace, rng: np.random.Generator,
    grad_params: GradientParams = GradientParams(),
    grads: list[tuple[float, float, float]] | None = None,
) -> Trajectory:
    """Single-waypoint straight-line motion with epsilon-greedy direction:
    uniform with probability epsilon, otherwise around the descent
    direction of the heuristic with a +-pi/4 deviation."""
    if rng.uniform() < config.epsilon:
        gamma = rng.uniform(-math.pi, math.pi)
    else:
        if grads is None:
            grads = heuristic_gradient(spec, arr, grad_params)
        gx, gy, _ = grads[i]
        if gx * gx + gy * gy < 1e-24:
            gamma = rng.uniform(-math.pi, math.pi)
        else:
            gamma = math.atan2(-gy, -gx) + rng.uniform(-math.pi / 4, math.pi / 4)
    l_min, l_max = config.length_range(ws)
    length = rng.uniform(l_min, l_max)
    dtheta = rng.uniform(-math.pi, math.pi)
    pose = arr.poses[i]
    # keep the waypoint clear of the out-of-bounds guard band so the
    # executor never has to chase a target at the workspace edge
    pad = ws.boundary_margin + 0.5 * arr.shapes[i].circumradius
    x = min(max(pose.x + length * math.cos(gamma), ws.min[0] + pad), ws.max[0] - pad)
    y = min(max(pose.y + length * math.sin(gamma), ws.min[1] + pad), ws.max[1] - pad)
    return [Pose2(x, y, pose.theta + dtheta)]


def expand_tree(
    tree: PlanTree,
    node_id: int,
    i: int,
    spec: TaskSpec,
    config: PlannerConfig,
    ws: Workspace,
    sim_params: SimParams,
    rng: np.random.Generator,
    grad_params: GradientParams = GradientParams(),
) -> int | None:
    """Try one expansion from a node with the activated object ``i``.

    Returns the new node id, or None when the candidate trajectory is
    empty, its first push start is occluded, or the simulated outcome is
    invalid.
    """
    node = tree.nodes[node_id]
    arr = node.arrangement
    use_mode2 = rng.uniform() < config.p_astar and i not in node.mode2_explored
    if use_mode2:
        node.mode2_explored.add(i)
        grid = build_grid(arr, i, ws, default_params(arr, i))
        goal_cell = find_goal_cell(grid, spec, arr, i)
        start_cell = grid.nearest_cell((arr.poses[i].x, arr.poses[i].y))
        found = soft_astar(grid, start_cell, goal_cell, hard=config.hard_astar)
        if found is None:
            return None
        traj = path_to_trajectory(found[0], grid, arr.poses[i].theta)
        if not traj:
            return None
    else:
        if not config.mode1_enabled:
            return None
        traj = mode1_trajectory(arr, i, spec, config, ws, rng, grad_params,
                                grads=node.grads)
    # lazy feasibility: the pusher must be able to start the first push
    action = pushing.push_strategy(arr.poses[i], traj[0], arr.shapes[i])
    if action is None:
        return None
    start = pushing.start_position(arr.poses[i], arr.shapes[i], action,
                                   sim_params.pusher_radius)
    if pushing.occluded(start, arr, i, ws, sim_params.pusher_radius):
        return None
    result = simulate_trajectory(arr, i, traj, ws, sim_params)
    if not result.valid:
        return None
    return tree.add_child(node_id, result.arrangement, (i, traj))


def ocp_plan(
    start: Arrangement,
    spec: TaskSpec,
    config: PlannerConfig,
    ws: Workspace,
    sim_params: SimParams,
    rng: np.random.Generator,
    grad_params: GradientParams = GradientParams(),
) -> list[tuple[int, Trajectory]]:
    """Grow the tree until a goal arrangement appears or the node budget is
    spent, then backtrace the goal node or the lowest-cost node (earliest
    creation breaks ties; an empty plan means the root already wins)."""
    if goal_satisfied(spec, start):
        return []
    tree = PlanTree.rooted(start)
    sigma = config.kernel_sigma(start)
    # failed expansions (occlusion, invalid outcomes) don't grow the tree,
    # so cap total attempts to keep planning time bounded in clutter
    attempts_left = config.attempt_factor * config.s_max
    while len(tree.nodes) < config.s_max and attempts_left > 0:
        attempts_left -= 1
        node_id = sample_node(tree, config.d_max, rng)
        if node_id is None:
            break
        node = tree.nodes[node_id]
        arr = node.arrangement
        if node.scores is None:
            node.grads = heuristic_gradient(spec, arr, grad_params)
            mags = _magnitudes_from_grads(node.grads, arr.shapes)
            node.scores = _scores_from_magnitudes(
                mags, arr.positions(), sigma, config.stretch_k
            )
        i = _sample_from_scores(node.scores, rng)
        new_id = expand_tree(tree, node_id, i, spec, config, ws, sim_params,
                             rng, grad_params)
        if new_id is not None and goal_satisfied(spec, tree.nodes[new_id].arrangement):
            return tree.backtrace(new_id)
    best_id = 0
    best_h = heuristic(spec, start)
    for nid, node in enumerate(tree.nodes[1:], start=1):
        h = heuristic(spec, node.arrangement)
        if h < best_h - 1e-15:
            best_h = h
            best_id = nid
    return tree.backtrace(best_id)
