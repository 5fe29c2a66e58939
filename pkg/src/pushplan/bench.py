"""Trial orchestration: seeded runs, metric records, suites, traces.

Wall-clock budgets from real-robot protocols translate to simulated-push
budgets (pushes = minutes * 60 / seconds_per_push) so results do not
depend on the host machine; real wall time is still recorded.
"""
from __future__ import annotations

import dataclasses
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .planner import PlannerConfig
from .pushing import Budgets, LoopResult, NoiseModel, Tolerances, rearrange_loop
from .scenes import Scene
from .sim import SimParams
from .tasks import GoalRegionsTask

SECONDS_PER_PUSH = 2.5  # conversion factor for wall-clock push budgets


@dataclass(frozen=True)
class TrialConfig:
    planner: PlannerConfig = PlannerConfig()
    sim: SimParams = SimParams()
    noise: NoiseModel = NoiseModel()
    tol: Tolerances = Tolerances()
    budgets: Budgets = Budgets()
    d_push: float = 0.01
    seconds_per_push: float = SECONDS_PER_PUSH


class ConfigError(ValueError):
    pass


def _coerce(current, raw: str):
    if isinstance(current, bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if current is None or isinstance(current, float):
        return float(raw)
    raise ConfigError(f"cannot override field of type {type(current).__name__}")


def _apply_section(section, updates: dict):
    known = {f.name for f in dataclasses.fields(section)}
    coerced = {}
    for key, value in updates.items():
        if key not in known:
            raise ConfigError(
                f"unknown field {key!r}; expected one of {sorted(known)}"
            )
        current = getattr(section, key)
        coerced[key] = _coerce(current, str(value)) if isinstance(value, str) else value
    return replace(section, **{k: v for k, v in coerced.items() if v is not None})


def build_config(
    defaults: dict | None = None, overrides: list[str] | None = None
) -> TrialConfig:
    """Merge scene defaults and ``section.key=value`` override strings into
    a trial configuration."""
    sections: dict[str, dict] = {
        "planner": {}, "sim": {}, "noise": {}, "tol": {}, "budgets": {}, "executor": {},
    }
    for source in (defaults or {}), _parse_overrides(overrides or []):
        for name, updates in source.items():
            if name not in sections:
                raise ConfigError(
                    f"unknown config section {name!r}; expected one of {sorted(sections)}"
                )
            sections[name].update(updates)
    cfg = TrialConfig()
    executor = dict(sections["executor"])
    if "d_push" in executor:
        v = executor.pop("d_push")
        cfg = replace(cfg, d_push=float(v))
    if "seconds_per_push" in executor:
        v = executor.pop("seconds_per_push")
        cfg = replace(cfg, seconds_per_push=float(v))
    if executor:
        raise ConfigError(f"unknown executor field(s): {sorted(executor)}")
    budgets = dict(sections["budgets"])
    if "budget_minutes" in budgets:
        minutes = float(budgets.pop("budget_minutes"))
        budgets["max_pushes"] = max(
            1, math.floor(minutes * 60.0 / cfg.seconds_per_push)
        )
    return replace(
        cfg,
        planner=_apply_section(cfg.planner, sections["planner"]),
        sim=_apply_section(cfg.sim, sections["sim"]),
        noise=_apply_section(cfg.noise, sections["noise"]),
        tol=_apply_section(cfg.tol, sections["tol"]),
        budgets=_apply_section(cfg.budgets, budgets),
    )


def _parse_overrides(overrides: list[str]) -> dict:
    out: dict[str, dict] = {}
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(
                f"override {item!r} must look like section.key=value"
            )
        key, value = item.split("=", 1)
        section, name = key.split(".", 1)
        out.setdefault(section, {})[name] = value
    return out


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    success: bool
    execution_steps: int  # simulated pushes
    num_actions: int
    planning_time_s: float
    planning_time_per_action_s: float
    wall_time_s: float


class TraceWriter:
    """Line-delimited JSON event stream; every record carries a type tag
    and a monotonically nondecreasing step counter."""

    def __init__(self, stream):
        self.stream = stream

    def emit(self, type: str, **fields):
        json.dump({"type": type, **fields}, self.stream)
        self.stream.write("\n")

    @staticmethod
    def scene_fields(scene: Scene) -> dict:
        fields = {
            "workspace": {
                "min": list(scene.workspace.min),
                "max": list(scene.workspace.max),
                "boundary_margin": scene.workspace.boundary_margin,
            },
            "shapes": [
                {"type": "circle", "radius": o.shape.radius}
                if hasattr(o.shape, "radius")
                else {"type": "polygon", "vertices": [list(v) for v in o.shape.vertices]}
                for o in scene.objects
            ],
            "classes": [o.cls for o in scene.objects],
        }
        if isinstance(scene.task, GoalRegionsTask):
            fields["regions"] = [
                {"center": list(r.center), "radius": r.radius}
                for r in scene.task.regions
            ]
        return fields


def run_trial(
    scene: Scene,
    seed: int,
    overrides: list[str] | None = None,
    trace_stream=None,
) -> TrialRecord:
    cfg = build_config(scene.defaults, overrides)
    rng = np.random.default_rng(seed)
    arr = scene.arrangement()
    trace = None
    if trace_stream is not None:
        trace = TraceWriter(trace_stream)
        trace.emit(
            "observe", step=0,
            poses=[[p.x, p.y, p.theta] for p in arr.poses],
            scene=TraceWriter.scene_fields(scene),
        )
    result: LoopResult = rearrange_loop(
        arr, scene.task, scene.workspace, cfg.planner, cfg.sim, cfg.noise,
        cfg.tol, cfg.budgets, rng, d_push=cfg.d_push, trace=trace,
    )
    per_action = (
        result.planning_time_s / result.num_actions if result.num_actions else 0.0
    )
    return TrialRecord(
        seed=seed,
        success=result.success,
        execution_steps=result.pushes,
        num_actions=result.num_actions,
        planning_time_s=result.planning_time_s,
        planning_time_per_action_s=per_action,
        wall_time_s=result.wall_time_s,
    )


@dataclass
class SuiteResult:
    scene_name: str
    records: list[TrialRecord]

    @property
    def success_rate(self) -> float:
        return sum(r.success for r in self.records) / len(self.records)

    def aggregate(self) -> dict:
        def stats(values):
            mean = statistics.fmean(values)
            std = statistics.pstdev(values) if len(values) > 1 else 0.0
            return {"mean": mean, "std": std}

        return {
            "scene": self.scene_name,
            "trials": len(self.records),
            "success_rate": self.success_rate,
            "execution_steps": stats([r.execution_steps for r in self.records]),
            "num_actions": stats([r.num_actions for r in self.records]),
            "planning_time_s": stats([r.planning_time_s for r in self.records]),
            "planning_time_per_action_s": stats(
                [r.planning_time_per_action_s for r in self.records]
            ),
            "wall_time_s": stats([r.wall_time_s for r in self.records]),
        }


def _suite_trial(args):
    scene, seed, overrides = args
    return run_trial(scene, seed, overrides)


def trial_seed(master_seed: int, scene_index: int, trial_index: int) -> int:
    return master_seed * 1_000_003 + scene_index * 1_009 + trial_index


def run_suite(
    scenes: list[Scene],
    trials: int,
    master_seed: int = 0,
    jobs: int = 1,
    overrides: list[str] | None = None,
) -> list[SuiteResult]:
    """Run every scene ``trials`` times with per-trial derived seeds.

    Results are independent of ordering and parallelism because each trial
    owns its RNG.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = [
        (scene, trial_seed(master_seed, si, t), overrides)
        for si, scene in enumerate(scenes)
        for t in range(trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_suite_trial, tasks))
    else:
        records = [_suite_trial(t) for t in tasks]
    results = []
    for si, scene in enumerate(scenes):
        results.append(
            SuiteResult(scene.name, records[si * trials:(si + 1) * trials])
        )
    return results


def format_table(results: list[SuiteResult]) -> str:
    headers = [
        "scene", "trials", "success", "steps", "actions",
        "plan time (s)", "plan/action (s)",
    ]
    rows = []
    for res in results:
        agg = res.aggregate()
        rows.append([
            agg["scene"],
            str(agg["trials"]),
            f"{100.0 * agg['success_rate']:.0f}%",
            f"{agg['execution_steps']['mean']:.1f} ± {agg['execution_steps']['std']:.1f}",
            f"{agg['num_actions']['mean']:.1f} ± {agg['num_actions']['std']:.1f}",
            f"{agg['planning_time_s']['mean']:.2f} ± {agg['planning_time_s']['std']:.2f}",
            f"{agg['planning_time_per_action_s']['mean']:.3f} ± "
            f"{agg['planning_time_per_action_s']['std']:.3f}",
        ])
    widths = [
        max(len(headers[c]), *(len(r[c]) for r in rows)) if rows else len(headers[c])
        for c in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for r in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


def write_suite_json(results: list[SuiteResult], path: str):
    payload = [
        {
            "aggregate": res.aggregate(),
            "records": [dataclasses.asdict(r) for r in res.records],
        }
        for res in results
    ]
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
