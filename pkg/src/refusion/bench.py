"""Throughput of the classical pipeline and of the individual kernels."""

import json
import time
from dataclasses import replace

import numpy as np

from . import kernels
from .backends import ColorBlobDetector, NccTemplateTracker
from .fusion import FusionConfig, initialize, step
from .imaging import gray_array
from .synth import SceneRenderer, benchmark_script

TARGET_FPS = 85.0
LAP_VAR_FLOOR = 500.0
RESOLUTION = (320, 240)
PATH_LENGTH = 780.0  # perimeter loop of benchmark_script


def bench_script(frames: int, seed: int = 7):
    base = benchmark_script(seed=seed, frame_count=max(frames, 160))
    return replace(base, speed=0.95 * PATH_LENGTH / base.frame_count)


def _rate(n, seconds):
    return n / seconds if seconds > 0 else float("inf")


def time_pipeline(frames: int = 500, seed: int = 7) -> dict:
    """Run blur check + reference tracker + periodic blob detector.

    Only ``step`` calls are timed; frame synthesis is excluded.
    """
    renderer = SceneRenderer(bench_script(frames, seed))
    first = renderer.render(1)
    init_box = renderer.truth(1)
    state = initialize(first, init_box, FusionConfig(), NccTemplateTracker(), ColorBlobDetector())
    elapsed = 0.0
    with kernels.record_timings() as timings:
        for t in range(1, frames + 1):
            frame = renderer.render(t) if t > 1 else first
            t0 = time.perf_counter()
            step(state, frame)
            elapsed += time.perf_counter() - t0
    in_pipeline = {name: {"calls": c, "seconds": s} for name, (c, s) in sorted(timings.items())}
    return {"frames": frames, "seconds": elapsed, "fps": _rate(frames, elapsed),
            "kernels": in_pipeline}


def time_kernels(impl: kernels.KernelSet, frames: int = 500, seed: int = 7) -> dict:
    """Per-frame workloads: lap_var over a full 320x240 frame, one tracker
    search (24x24 template, radius 16) and one 64x64 patch histogram."""
    renderer = SceneRenderer(bench_script(16, seed))
    grays = [np.ascontiguousarray(gray_array(renderer.render(t))) for t in range(1, 9)]
    rgb = np.ascontiguousarray(renderer.render(1).data)
    b = renderer.boxes[0]
    x0, y0 = int(b.x), int(b.y)
    template = np.ascontiguousarray(grays[0][y0:y0 + 24, x0:x0 + 24])
    region = np.ascontiguousarray(grays[1][max(y0 - 16, 0):y0 + 40, max(x0 - 16, 0):x0 + 40])
    patch = np.ascontiguousarray(rgb[y0:y0 + 64, x0:x0 + 64])
    # compile / warm caches outside the timed loops
    impl.lap_var(grays[0], True)
    impl.ncc_map(region, template)
    impl.joint_histogram(patch, 8)

    out = {}
    t0 = time.perf_counter()
    for k in range(frames):
        impl.lap_var(grays[k % len(grays)], True)
    out["lap_var"] = _rate(frames, time.perf_counter() - t0)
    t0 = time.perf_counter()
    for _ in range(frames):
        impl.ncc_map(region, template)
    out["ncc"] = _rate(frames, time.perf_counter() - t0)
    t0 = time.perf_counter()
    for _ in range(frames):
        impl.joint_histogram(patch, 8)
    out["histogram"] = _rate(frames, time.perf_counter() - t0)
    return out


def run_bench(frames: int = 500, seed: int = 7, compare_backends: bool = False) -> dict:
    kernels.warmup()
    # one untimed short pass so JIT compilation of every call path is done
    time_pipeline(frames=20, seed=seed)
    pipe = time_pipeline(frames=frames, seed=seed)
    kern = time_kernels(kernels.IMPLEMENTATIONS[kernels.BACKEND], frames=frames, seed=seed)
    kernel_seconds = sum(v["seconds"] for v in pipe["kernels"].values())
    report = {
        "backend": kernels.BACKEND,
        "frames": frames,
        "resolution": list(RESOLUTION),
        "pipeline_fps": pipe["fps"],
        "lap_var_fps": kern["lap_var"],
        "ncc_fps": kern["ncc"],
        "histogram_fps": kern["histogram"],
        "pipeline_seconds": pipe["seconds"],
        "kernel_seconds_in_pipeline": kernel_seconds,
        "kernels_in_pipeline": pipe["kernels"],
        "target_fps": TARGET_FPS,
        "meets_target_fps": pipe["fps"] >= TARGET_FPS,
        "lap_var_floor_met": kern["lap_var"] >= LAP_VAR_FLOOR,
    }
    if compare_backends:
        report["backends"] = {
            name: time_kernels(impl, frames=frames, seed=seed)
            for name, impl in kernels.IMPLEMENTATIONS.items()
        }
    return report


def format_report(report: dict) -> str:
    lines = [
        f"backend           {report['backend']}",
        f"pipeline          {report['pipeline_fps']:9.1f} frames/s  "
        f"({report['frames']} frames at {report['resolution'][0]}x{report['resolution'][1]})",
        f"lap_var           {report['lap_var_fps']:9.1f} frames/s",
        f"ncc               {report['ncc_fps']:9.1f} frames/s",
        f"histogram         {report['histogram_fps']:9.1f} frames/s",
        f"kernel share      {report['kernel_seconds_in_pipeline']:.3f}s of "
        f"{report['pipeline_seconds']:.3f}s pipeline time",
    ]
    for name, rates in report.get("backends", {}).items():
        lines.append(f"[{name:5s}]  lap_var {rates['lap_var']:9.1f}  ncc {rates['ncc']:9.1f}  "
                     f"histogram {rates['histogram']:9.1f}  frames/s")
    return "\n".join(lines) + "\n"


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"

