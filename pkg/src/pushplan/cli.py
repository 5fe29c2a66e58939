"""Command-line interface: single runs, benchmark suites, trace rendering.

Exit codes: 0 on success, 1 when the task fails (run subcommand), 2 on
usage or file errors.
"""
from __future__ import annotations

import argparse
import os
import sys

from .bench import ConfigError, format_table, run_suite, run_trial, write_suite_json
from .render import render_trace
from .scenes import Scene, SceneError, builtin_scene, builtin_scene_names, load_scene

SCENE_DIR_ENV = "PUSHPLAN_SCENE_DIR"


def _resolve_scene(name: str) -> Scene:
    if os.path.exists(name):
        return load_scene(name)
    if name in builtin_scene_names():
        return builtin_scene(name)
    scene_dir = os.environ.get(SCENE_DIR_ENV)
    if scene_dir:
        for candidate in (name, name + ".yaml", name + ".yml"):
            path = os.path.join(scene_dir, candidate)
            if os.path.exists(path):
                return load_scene(path)
    raise SceneError(
        f"scene {name!r} is neither a file nor a builtin "
        f"({', '.join(builtin_scene_names())})"
    )


def _cmd_run(args) -> int:
    scene = _resolve_scene(args.scene)
    if args.trace:
        with open(args.trace, "w") as stream:
            record = run_trial(scene, args.seed, overrides=args.set,
                               trace_stream=stream)
    else:
        record = run_trial(scene, args.seed, overrides=args.set)
    print(f"scene: {scene.name}")
    print(f"seed: {record.seed}")
    print(f"success: {record.success}")
    print(f"execution steps (pushes): {record.execution_steps}")
    print(f"actions: {record.num_actions}")
    print(f"planning time: {record.planning_time_s:.3f} s")
    print(f"planning time per action: {record.planning_time_per_action_s:.3f} s")
    print(f"wall time: {record.wall_time_s:.3f} s")
    return 0 if record.success else 1


def _suite_scenes(suite: str) -> list[Scene]:
    if os.path.isdir(suite):
        names = sorted(
            f for f in os.listdir(suite) if f.endswith((".yaml", ".yml"))
        )
        if not names:
            raise SceneError(f"no scene files (*.yaml) in {suite!r}")
        return [load_scene(os.path.join(suite, f)) for f in names]
    return [_resolve_scene(name) for name in suite.split(",")]


def _cmd_bench(args) -> int:
    scenes = _suite_scenes(args.suite)
    results = run_suite(
        scenes, trials=args.trials, master_seed=args.seed, jobs=args.jobs,
        overrides=args.set,
    )
    print(format_table(results))
    if args.out:
        write_suite_json(results, args.out)
    return 0


def _cmd_render(args) -> int:
    paths = render_trace(args.trace, args.out, stride=args.stride)
    print(f"wrote {len(paths)} frame(s) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pushplan",
        description="Planar pushing rearrangement: planner, simulator, benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single seeded trial")
    run.add_argument("--scene", required=True,
                     help="scene file path or builtin scene name")
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--trace", help="write a line-delimited JSON trace here")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="config override, e.g. planner.s_max=100")
    run.set_defaults(func=_cmd_run)

    bench = sub.add_parser("bench", help="run a suite of trials and aggregate")
    bench.add_argument("--suite", required=True,
                       help="directory of scene files, or comma-separated names")
    bench.add_argument("--trials", type=int, required=True)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", help="write machine-readable results (JSON)")
    bench.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    bench.set_defaults(func=_cmd_bench)

    render = sub.add_parser("render", help="render SVG frames from a trace")
    render.add_argument("--trace", required=True)
    render.add_argument("--out", required=True, help="output directory")
    render.add_argument("--stride", type=int, default=10,
                        help="sample one frame every N pushes")
    render.set_defaults(func=_cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (SceneError, ConfigError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
