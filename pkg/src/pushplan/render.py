"""Static visualization of trace files.

Frames are sampled from the push stream: the initial observation, every
``stride``-th push, and the final state, each rendered to a vector image
showing the workspace, the objects colored by class, goal regions, and
the most recent planned trajectories.
"""
from __future__ import annotations

import json
import math
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Circle as CirclePatch
from matplotlib.patches import Polygon as PolygonPatch
from matplotlib.patches import Rectangle

_CLASS_COLORS = plt.get_cmap("tab10")


def read_trace(path: str, warn=None) -> list[dict]:
    """Parse a line-delimited JSON trace; corrupt lines are skipped with a
    warning instead of aborting."""
    events = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
                if not isinstance(event, dict) or "type" not in event:
                    raise ValueError("record must be a mapping with a type tag")
            except ValueError as e:
                message = f"{path}:{lineno}: skipping corrupt trace line ({e})"
                (warn or (lambda m: print(m, file=sys.stderr)))(message)
                continue
            events.append(event)
    return events


def _rotate(points, theta):
    c, s = math.cos(theta), math.sin(theta)
    return [(c * x - s * y, s * x + c * y) for x, y in points]


def _draw_frame(ax, scene: dict, poses, plan, title: str):
    ws = scene["workspace"]
    margin = ws.get("boundary_margin", 0.0)
    ax.add_patch(Rectangle(
        ws["min"], ws["max"][0] - ws["min"][0], ws["max"][1] - ws["min"][1],
        fill=False, edgecolor="black", linewidth=1.2,
    ))
    if margin > 0.0:
        ax.add_patch(Rectangle(
            (ws["min"][0] + margin, ws["min"][1] + margin),
            ws["max"][0] - ws["min"][0] - 2 * margin,
            ws["max"][1] - ws["min"][1] - 2 * margin,
            fill=False, edgecolor="gray", linestyle="--", linewidth=0.8,
        ))
    classes = scene["classes"]
    for region, cls in zip(scene.get("regions", []), classes):
        ax.add_patch(CirclePatch(
            region["center"], region["radius"], fill=False,
            edgecolor=_CLASS_COLORS((cls - 1) % 10), linestyle=":", linewidth=1.0,
        ))
    for shape, cls, (x, y, theta) in zip(scene["shapes"], classes, poses):
        color = _CLASS_COLORS((cls - 1) % 10)
        if shape["type"] == "circle":
            ax.add_patch(CirclePatch((x, y), shape["radius"],
                                     facecolor=color, edgecolor="black", alpha=0.8))
        else:
            verts = [(x + px, y + py) for px, py in _rotate(shape["vertices"], theta)]
            ax.add_patch(PolygonPatch(verts, facecolor=color,
                                      edgecolor="black", alpha=0.8))
    for step in plan or []:
        pts = step.get("waypoints", [])
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    color="red", linewidth=0.8, marker=".", markersize=2)
    pad = 0.02
    ax.set_xlim(ws["min"][0] - pad, ws["max"][0] + pad)
    ax.set_ylim(ws["min"][1] - pad, ws["max"][1] + pad)
    ax.set_aspect("equal")
    ax.set_title(title, fontsize=9)
    ax.set_xticks([])
    ax.set_yticks([])


def render_trace(trace_path: str, out_dir: str, stride: int = 10,
                 warn=None) -> list[str]:
    """Write one SVG per sampled frame; returns the written paths.

    An empty trace produces zero images. With P pushes the frame count is
    floor(P / stride) + 2 (initial observation plus final state).
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    events = read_trace(trace_path, warn=warn)
    scene = None
    initial_poses = None
    pushes = []  # (poses, plan at that time)
    current_plan = None
    for event in events:
        kind = event["type"]
        if kind == "observe" and "scene" in event and scene is None:
            scene = event["scene"]
            initial_poses = event["poses"]
        elif kind == "plan_end":
            current_plan = event.get("plan")
        elif kind == "push":
            pushes.append((event["poses"], current_plan))
    if scene is None or initial_poses is None:
        return []
    os.makedirs(out_dir, exist_ok=True)

    frames = [(initial_poses, None, "initial")]
    for k in range(stride, len(pushes) + 1, stride):
        poses, plan = pushes[k - 1]
        frames.append((poses, plan, f"push {k}"))
    final_poses = pushes[-1][0] if pushes else initial_poses
    frames.append((final_poses, None, "final"))

    paths = []
    for idx, (poses, plan, title) in enumerate(frames):
        fig, ax = plt.subplots(figsize=(4, 4))
        _draw_frame(ax, scene, poses, plan, title)
        out_path = os.path.join(out_dir, f"frame_{idx:04d}.svg")
        fig.savefig(out_path, bbox_inches="tight")
        plt.close(fig)
        paths.append(out_path)
    return paths
