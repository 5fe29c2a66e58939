"""Object-centric planning and simulation for planar pushing rearrangement."""

from .geometry import (
    Circle, ConvexPolygon, Pose2, Shape, Workspace, box, compose,
    convex_hull_distance, penetration, regular_polygon, relative_transform,
    wrap_angle,
)
from .sim import (
    Arrangement, SimParams, Trajectory, pusher_step, resolve_penetrations,
    simulate_trajectory,
)
from .tasks import (
    GoalRegion, GoalRegionsTask, GradientParams, SortNoGoals, TaskSpec,
    assign_goals, goal_satisfied, heuristic, heuristic_gradient,
)
from .softastar import GridMap, SoftAStarParams, build_grid, find_goal_cell, soft_astar
from .planner import PlannerConfig, PlanTree, TreeNode, ocp_plan
from .pushing import (
    Budgets, NoiseModel, PushAction, Tolerances, execute_trajectory, occluded,
    push_strategy, rearrange_loop,
)
from .scenes import Scene, SceneError, builtin_scene, builtin_scene_names, load_scene, save_scene
from .bench import TrialConfig, TrialRecord, run_suite, run_trial

__version__ = "0.1.0"
