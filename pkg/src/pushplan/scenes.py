"""Scene files: workspace + objects + task, loadable from YAML.

A scene bundles everything a trial needs: the workspace, the initial
object layout, the task specification, and optional default overrides for
the planner/executor configuration. Builtin benchmark scenes are
constructed in code and can be saved to files for editing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from .geometry import (
    Circle, ConvexPolygon, Pose2, Shape, Workspace, box, penetration,
)
from .sim import Arrangement
from .tasks import GoalRegion, GoalRegionsTask, SortNoGoals, TaskSpec

CUBE_SIDE = 0.0254  # 1-inch cubes used by every builtin scene


class SceneError(ValueError):
    """Scene file failed to parse or validate; message names the field."""


@dataclass(frozen=True)
class SceneObject:
    shape: Shape
    cls: int
    pose: Pose2


@dataclass(frozen=True)
class Scene:
    name: str
    workspace: Workspace
    objects: tuple[SceneObject, ...]
    task: TaskSpec
    defaults: dict = field(default_factory=dict, compare=False)

    def arrangement(self) -> Arrangement:
        return Arrangement(
            poses=tuple(o.pose for o in self.objects),
            shapes=tuple(o.shape for o in self.objects),
            classes=tuple(o.cls for o in self.objects),
        )

    def packing_factor(self) -> float:
        """Total object footprint area over the in-bounds workspace area
        (the out-of-bounds guard band does not count as usable area)."""
        ws = self.workspace
        m = ws.boundary_margin
        usable = (ws.width - 2.0 * m) * (ws.height - 2.0 * m)
        return sum(_footprint_area(o.shape) for o in self.objects) / usable


def _footprint_area(shape: Shape) -> float:
    if isinstance(shape, Circle):
        return math.pi * shape.radius**2
    verts = shape.vertices
    area = 0.0
    for k in range(len(verts)):
        x0, y0 = verts[k]
        x1, y1 = verts[(k + 1) % len(verts)]
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0


# ---------------------------------------------------------------------------
# YAML (de)serialization


def _require(mapping, key: str, path: str):
    if not isinstance(mapping, dict):
        raise SceneError(f"{path}: expected a mapping")
    if key not in mapping:
        raise SceneError(f"{path}.{key}: missing required field")
    return mapping[key]


def _point(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SceneError(f"{path}: expected [x, y]")
    return (float(value[0]), float(value[1]))


def _shape_from_dict(d, path: str) -> Shape:
    kind = _require(d, "type", path)
    try:
        if kind == "circle":
            return Circle(float(_require(d, "radius", path)))
        if kind == "box":
            return box(float(_require(d, "size", path)))
        if kind == "polygon":
            verts = _require(d, "vertices", path)
            return ConvexPolygon(tuple(_point(v, f"{path}.vertices") for v in verts))
    except ValueError as e:
        raise SceneError(f"{path}: {e}") from e
    raise SceneError(f"{path}.type: unknown shape type {kind!r}")


def _shape_to_dict(shape: Shape) -> dict:
    if isinstance(shape, Circle):
        return {"type": "circle", "radius": shape.radius}
    return {"type": "polygon", "vertices": [list(v) for v in shape.vertices]}


def _task_from_dict(d, ws: Workspace, path: str) -> TaskSpec:
    variant = _require(d, "variant", path)
    if variant == "sort":
        num_classes = int(_require(d, "num_classes", path))
        base = SortNoGoals.for_workspace(
            ws, num_classes,
            separation_threshold=float(d.get("separation_threshold", 0.05)),
        )
        if "cluster_weight" in d:
            base = SortNoGoals(num_classes, base.separation_threshold,
                               float(d["cluster_weight"]), base.repel_scale)
        if "repel_scale" in d:
            base = SortNoGoals(num_classes, base.separation_threshold,
                               base.cluster_weight, float(d["repel_scale"]))
        return base
    if variant == "goal_regions":
        raw = _require(d, "regions", path)
        regions = []
        for k, r in enumerate(raw):
            rp = f"{path}.regions[{k}]"
            center = _point(_require(r, "center", rp), rp + ".center")
            radius = float(_require(r, "radius", rp))
            try:
                regions.append(GoalRegion(center, radius))
            except ValueError as e:
                raise SceneError(f"{rp}: {e}") from e
        groups = tuple(tuple(int(i) for i in g) for g in d.get("interchange_groups", []))
        try:
            return GoalRegionsTask(tuple(regions), groups)
        except ValueError as e:
            raise SceneError(f"{path}: {e}") from e
    raise SceneError(f"{path}.variant: unknown task variant {variant!r}")


def _task_to_dict(task: TaskSpec) -> dict:
    if isinstance(task, SortNoGoals):
        return {
            "variant": "sort",
            "num_classes": task.num_classes,
            "separation_threshold": task.separation_threshold,
            "cluster_weight": task.cluster_weight,
            "repel_scale": task.repel_scale,
        }
    return {
        "variant": "goal_regions",
        "regions": [
            {"center": list(r.center), "radius": r.radius} for r in task.regions
        ],
        "interchange_groups": [list(g) for g in task.interchange_groups],
    }


def scene_from_dict(data, name: str = "scene") -> Scene:
    wd = _require(data, "workspace", name)
    try:
        ws = Workspace(
            min=_point(_require(wd, "min", f"{name}.workspace"), f"{name}.workspace.min"),
            max=_point(_require(wd, "max", f"{name}.workspace"), f"{name}.workspace.max"),
            boundary_margin=float(wd.get("boundary_margin", 0.0)),
        )
    except ValueError as e:
        raise SceneError(f"{name}.workspace: {e}") from e
    raw_objects = _require(data, "objects", name)
    if not raw_objects:
        raise SceneError(f"{name}.objects: need at least one object")
    objects = []
    for k, od in enumerate(raw_objects):
        op = f"{name}.objects[{k}]"
        shape = _shape_from_dict(_require(od, "shape", op), op + ".shape")
        cls = int(_require(od, "class", op))
        pv = _require(od, "pose", op)
        if not isinstance(pv, (list, tuple)) or len(pv) != 3:
            raise SceneError(f"{op}.pose: expected [x, y, theta]")
        objects.append(SceneObject(shape, cls, Pose2(*map(float, pv))))
    task = _task_from_dict(_require(data, "task", name), ws, f"{name}.task")
    scene = Scene(
        name=str(data.get("name", name)),
        workspace=ws,
        objects=tuple(objects),
        task=task,
        defaults=dict(data.get("defaults", {})),
    )
    _validate_layout(scene)
    return scene


def scene_to_dict(scene: Scene) -> dict:
    return {
        "name": scene.name,
        "workspace": {
            "min": list(scene.workspace.min),
            "max": list(scene.workspace.max),
            "boundary_margin": scene.workspace.boundary_margin,
        },
        "objects": [
            {
                "shape": _shape_to_dict(o.shape),
                "class": o.cls,
                "pose": [o.pose.x, o.pose.y, o.pose.theta],
            }
            for o in scene.objects
        ],
        "task": _task_to_dict(scene.task),
        "defaults": scene.defaults,
    }


def _validate_layout(scene: Scene, tol: float = 1e-4):
    for k, o in enumerate(scene.objects):
        if not scene.workspace.contains((o.pose.x, o.pose.y)):
            raise SceneError(f"{scene.name}.objects[{k}].pose: outside workspace")
    for a in range(len(scene.objects) - 1):
        oa = scene.objects[a]
        for b in range(a + 1, len(scene.objects)):
            ob = scene.objects[b]
            pen = penetration(oa.shape, oa.pose, ob.shape, ob.pose)
            if pen is not None and pen.depth > tol:
                raise SceneError(
                    f"{scene.name}.objects[{b}].pose: overlaps object {a} "
                    f"by {pen.depth:.4f} m"
                )


def load_scene(path: str) -> Scene:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise SceneError(f"{path}: not valid YAML ({e})") from e
    if not isinstance(data, dict):
        raise SceneError(f"{path}: top level must be a mapping")
    return scene_from_dict(data, name=str(data.get("name", path)))


def save_scene(scene: Scene, path: str):
    with open(path, "w") as f:
        yaml.safe_dump(scene_to_dict(scene), f, sort_keys=False)


# ---------------------------------------------------------------------------
# Builtin benchmark scenes


def _cubes(positions, classes, side=CUBE_SIDE):
    shape = box(side)
    return tuple(
        SceneObject(shape, c, Pose2(x, y, 0.0))
        for (x, y), c in zip(positions, classes)
    )


def _grid(cols_x, rows_y):
    return [(x, y) for y in rows_y for x in cols_x]


def _scene1() -> Scene:
    """Sorting 2 classes x 6 cubes, no explicit goals (packing ~0.10)."""
    ws = Workspace((-0.165, -0.15), (0.165, 0.15), boundary_margin=0.02)
    positions = _grid((-0.09, -0.03, 0.03, 0.09), (-0.06, 0.0, 0.06))
    classes = [1 + (k % 2) for k in range(12)]  # interleaved columns
    return Scene(
        name="scene1", workspace=ws,
        objects=_cubes(positions, classes),
        task=SortNoGoals.for_workspace(ws, 2),
        defaults={"budgets": {"max_pushes": 240}},
    )


def _scene2() -> Scene:
    """Sorting 3 classes x 5 cubes, no explicit goals (packing ~0.13)."""
    ws = Workspace((-0.165, -0.15), (0.165, 0.15), boundary_margin=0.02)
    positions = _grid((-0.11, -0.055, 0.0, 0.055, 0.11), (-0.055, 0.0, 0.055))
    classes = [1 + ((k + k // 5) % 3) for k in range(15)]  # shifted rows
    return Scene(
        name="scene2", workspace=ws,
        objects=_cubes(positions, classes),
        task=SortNoGoals.for_workspace(ws, 3),
        defaults={"budgets": {"max_pushes": 240}},
    )


def _scene3() -> Scene:
    """Sorting 4 classes x 8 cubes into one shared corner region per class
    (packing ~0.20)."""
    ws = Workspace((-0.197, -0.165), (0.197, 0.165), boundary_margin=0.02)
    cols = tuple(-0.154 + 0.044 * k for k in range(8))
    rows = (-0.0675, -0.0225, 0.0225, 0.0675)
    positions = _grid(cols, rows)
    classes = [1 + ((k + k // 8) % 4) for k in range(32)]
    corners = {
        1: (-0.105, -0.0725), 2: (0.105, -0.0725),
        3: (0.105, 0.0725), 4: (-0.105, 0.0725),
    }
    regions = tuple(GoalRegion(corners[c], 0.08) for c in classes)
    return Scene(
        name="scene3", workspace=ws,
        objects=_cubes(positions, classes),
        task=GoalRegionsTask(regions),
        defaults={"budgets": {"max_pushes": 720}},
    )


def _scene4() -> Scene:
    """2 classes x 5 cubes into interchangeable corner regions
    (packing ~0.095); classes start near the wrong corners."""
    ws = Workspace((-0.15, -0.15), (0.15, 0.15), boundary_margin=0.02)
    blue_centers = [(0.09, 0.09), (0.03, 0.09), (-0.03, 0.09), (0.09, 0.03), (0.09, -0.03)]
    red_centers = [(-0.09, -0.09), (-0.09, -0.03), (-0.09, 0.03), (-0.03, -0.09), (0.03, -0.09)]
    regions = tuple(GoalRegion(c, 0.02) for c in blue_centers + red_centers)
    positions = (
        [(-0.08, -0.08), (-0.04, -0.08), (-0.08, -0.04), (-0.04, -0.04), (0.0, -0.08)]
        + [(0.08, 0.08), (0.04, 0.08), (0.08, 0.04), (0.04, 0.04), (0.0, 0.08)]
    )
    classes = [1] * 5 + [2] * 5
    return Scene(
        name="scene4", workspace=ws,
        objects=_cubes(positions, classes),
        task=GoalRegionsTask(regions, ((0, 1, 2, 3, 4), (5, 6, 7, 8, 9))),
        defaults={"budgets": {"max_pushes": 240}},
    )


def _scene5() -> Scene:
    """4 classes x 4 cubes onto a goal ring of radius 10 cm; adjacent
    regions share a class (packing ~0.15)."""
    ws = Workspace((-0.15, -0.15), (0.15, 0.15), boundary_margin=0.02)
    regions = []
    for k in range(16):
        a = 2.0 * math.pi * k / 16.0
        regions.append(GoalRegion((0.10 * math.cos(a), 0.10 * math.sin(a)), 0.02))
    classes_regions = [1 + k // 4 for k in range(16)]
    positions = _grid((-0.06, -0.02, 0.02, 0.06), (-0.06, -0.02, 0.02, 0.06))
    classes = [1 + (k % 4) for k in range(16)]  # columns cut across classes
    order = sorted(range(16), key=lambda k: classes[k])
    objects = _cubes([positions[k] for k in order], sorted(classes))
    groups = tuple(
        tuple(i for i in range(16) if classes_regions[i] == c) for c in (1, 2, 3, 4)
    )
    return Scene(
        name="scene5", workspace=ws,
        objects=objects,
        task=GoalRegionsTask(tuple(regions), groups),
        defaults={"budgets": {"max_pushes": 360}},
    )


def _sorting_sim() -> Scene:
    """Desk-scale sorting with one shared goal circle per class in each
    workspace quadrant."""
    ws = Workspace((-0.3, -0.3), (0.3, 0.3), boundary_margin=0.02)
    corners = {1: (-0.135, -0.135), 2: (0.135, -0.135),
               3: (0.135, 0.135), 4: (-0.135, 0.135)}
    positions = _grid((-0.075, -0.025, 0.025, 0.075), (-0.075, -0.025, 0.025, 0.075))
    classes = [1 + ((k + k // 4) % 4) for k in range(16)]
    regions = tuple(GoalRegion(corners[c], 0.135) for c in classes)
    return Scene(
        name="sorting-sim", workspace=ws,
        objects=_cubes(positions, classes, side=0.04),
        task=GoalRegionsTask(regions),
        defaults={"budgets": {"max_pushes": 360}},
    )


def _accept_sort6() -> Scene:
    """2 classes x 3 cubes, each class into a shared side region; classes
    start on the wrong sides."""
    ws = Workspace((-0.165, -0.15), (0.165, 0.15), boundary_margin=0.02)
    left = GoalRegion((-0.085, 0.0), 0.06)
    right = GoalRegion((0.085, 0.0), 0.06)
    positions = [(0.03, 0.06), (0.09, 0.0), (0.03, -0.06),
                 (-0.03, 0.06), (-0.09, 0.0), (-0.03, -0.06)]
    classes = [1, 1, 1, 2, 2, 2]
    regions = tuple(left if c == 1 else right for c in classes)
    return Scene(
        name="accept-sort6", workspace=ws,
        objects=_cubes(positions, classes),
        task=GoalRegionsTask(regions),
        defaults={"budgets": {"max_pushes": 500}},
    )


def _accept_packed() -> Scene:
    """8 cubes around a tight ring in a small workspace (packing > 0.2);
    sorting without goal regions."""
    ws = Workspace((-0.1, -0.1), (0.1, 0.1), boundary_margin=0.02)
    positions = [
        (-0.035, -0.035), (0.0, -0.035), (0.035, -0.035),
        (-0.035, 0.0), (0.035, 0.0),
        (-0.035, 0.035), (0.0, 0.035), (0.035, 0.035),
    ]
    classes = [1, 2, 1, 2, 1, 2, 1, 2]
    task = SortNoGoals.for_workspace(ws, 2, separation_threshold=0.025)
    return Scene(
        name="accept-packed", workspace=ws,
        objects=_cubes(positions, classes),
        task=task,
        defaults={"budgets": {"max_pushes": 300}},
    )


_BUILTINS = {
    "scene1": _scene1,
    "scene2": _scene2,
    "scene3": _scene3,
    "scene4": _scene4,
    "scene5": _scene5,
    "sorting-sim": _sorting_sim,
    "accept-sort6": _accept_sort6,
    "accept-packed": _accept_packed,
}


def builtin_scene_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin_scene(name: str) -> Scene:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise SceneError(
            f"unknown builtin scene {name!r}; available: {', '.join(sorted(_BUILTINS))}"
        ) from None
    scene = factory()
    _validate_layout(scene)
    return scene
