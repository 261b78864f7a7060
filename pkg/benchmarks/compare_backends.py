"""Run ``refusion bench`` once with the numba kernels and once with the numpy
fallback (``REFUSION_NUMBA=0``), then print the throughput side by side.

    python benchmarks/compare_backends.py [--frames 500] [--out compare.json]
"""

import argparse
import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

KEYS = ("pipeline_fps", "lap_var_fps", "ncc_fps", "histogram_fps")


def bench(flag: str, frames: int, seed: int) -> dict:
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "report.json"
        env = dict(os.environ, REFUSION_NUMBA=flag)
        subprocess.run([sys.executable, "-m", "refusion", "bench", "--frames", str(frames),
                        "--seed", str(seed), "--out", str(out)],
                       env=env, check=True, stdout=subprocess.DEVNULL)
        return json.loads(out.read_text())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--frames", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", help="write both reports as JSON")
    args = ap.parse_args(argv)

    reports = {"numba": bench("1", args.frames, args.seed),
               "numpy": bench("0", args.frames, args.seed)}
    print(f"{'metric':16s}{'numba':>12s}{'numpy':>12s}{'speedup':>10s}")
    for key in KEYS:
        a, b = reports["numba"][key], reports["numpy"][key]
        print(f"{key:16s}{a:12.1f}{b:12.1f}{a / b:9.2f}x")
    if args.out:
        Path(args.out).write_text(json.dumps(reports, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
