"""Batch runner: parse a scene, run verification suites, emit reports.

Exit codes: 0 all executed suites passed; 1 input/scene error; 2-9 first
failing suite in the canonical order dual, wulff, curv, hk, mr, steiner,
reach, var.  Reports are deterministic: the same scene and seed produce
byte-identical report.json files (no timestamps, seeded generators only).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import InputError, SceneError, WulffkitError
from .scene import load_scene
from .suites import SUITE_ORDER, run_suite

__all__ = ["main", "run"]

SCHEMA_VERSION = "1.0"
COMMANDS = SUITE_ORDER + ("all",)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _apply_threads_cap():
    """Best-effort worker cap from WULFFKIT_THREADS (BLAS pools honor these)."""
    cap = os.environ.get("WULFFKIT_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)
    return int(cap) if cap else None


def run(command: str, scene_path, out_dir, seed=None, resolution=None, grid=None) -> int:
    """Execute ``command`` on a scene file; write report.json and CSVs."""
    threads = _apply_threads_cap()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if command not in COMMANDS:
        raise InputError(f"unknown command {command!r}; expected one of {COMMANDS}")

    scene = load_scene(scene_path)
    if seed is not None:
        scene = replace(scene, seed=int(seed))
    if resolution is not None:
        scene = replace(scene, resolution=resolution)
    if grid is not None and scene.grid is not None:
        scene = replace(
            scene,
            grid=type(scene.grid)(lo=scene.grid.lo, hi=scene.grid.hi, cells=int(grid)),
        )

    requested = [s for s in SUITE_ORDER if s in scene.suites] if command == "all" else [command]
    results = []
    exit_code = 0
    for name in requested:
        result = run_suite(name, scene, out)
        if command == "all" and result.skipped:
            results.append(result)
            continue
        results.append(result)
        if not result.passed and exit_code == 0:
            exit_code = 2 + SUITE_ORDER.index(name)

    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "scene": Path(scene_path).name,
        "seed": scene.seed,
        "rng": "numpy-default-pcg64",
        "resolution": _jsonable(scene.resolution),
        "threads": threads,
        "suites": [
            {
                "name": r.name,
                "verifies": r.verifies,
                "passed": r.passed,
                "skipped": r.skipped,
                "skip_reason": r.skip_reason,
                "checks": _jsonable(r.checks),
                "metrics": _jsonable(r.metrics),
            }
            for r in results
        ],
        "exit_code": exit_code,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return exit_code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wulffkit",
        description="Run anisotropic-geometry verification suites on a scene file.",
    )
    parser.add_argument("command", nargs="?", default=None, choices=COMMANDS)
    parser.add_argument("--scene", required=True, help="scene JSON path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--suite", default=None, choices=COMMANDS, help="alias for command")
    parser.add_argument("--seed", type=int, default=None, help="override the scene seed")
    parser.add_argument("--resolution", type=int, default=None, help="override resolution")
    parser.add_argument("--grid", type=int, default=None, help="override grid cell count")
    args = parser.parse_args(argv)

    command = args.command or args.suite or "all"
    if args.command and args.suite and args.command != args.suite:
        parser.error("give either a command or --suite, not two different ones")

    try:
        return run(
            command,
            args.scene,
            args.out,
            seed=args.seed,
            resolution=args.resolution,
            grid=args.grid,
        )
    except SceneError as exc:
        print(f"scene error: {exc}", file=sys.stderr)
        return 1
    except (InputError, WulffkitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
