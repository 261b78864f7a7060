"""Pick the default blur threshold from synthetic sharp/blurred ROI pairs.

For each scene and frame, the target ROI is scored once as rendered and once
after the same directional box blur the BLUR event applies. The threshold is
the midpoint of the gap between the sharpest blurred score and the least
sharp sharp score.

    python scripts/calibrate_blur.py [--scenes 12] [--frames 60]
"""

import argparse

import numpy as np

from refusion.blur import lap_var
from refusion.imaging import Frame, crop_roi, to_gray
from refusion.synth import LINEAR, PIECEWISE, SINUSOID, SceneRenderer, SceneScript, directional_box_blur


def scenes(n):
    rng = np.random.default_rng(2024)
    for k in range(n):
        kind = (LINEAR, SINUSOID, PIECEWISE)[k % 3]
        size = int(rng.integers(16, 40))
        yield SceneScript(
            frame_count=60, trajectory=kind, sprite_w=size, sprite_h=size,
            start=(float(rng.uniform(40, 280)), float(rng.uniform(40, 200))),
            velocity=tuple(rng.uniform(-4, 4, 2)),
            waypoints=((40, 40), (280, 40), (280, 200), (40, 200)),
            speed=float(rng.uniform(1.5, 4.0)), seed=int(rng.integers(1 << 30)))


def scores(n_scenes, n_frames, normalize=True):
    sharp, blurred = [], []
    for script in scenes(n_scenes):
        r = SceneRenderer(script)
        for t in range(2, min(n_frames, script.frame_count) + 1):
            frame = r.render(t)
            box = r.boxes[t - 1]
            soft = Frame(directional_box_blur(frame.data, r.velocity(t), r.blur_radius(t)), index=t)
            sharp.append(lap_var(to_gray(crop_roi(frame, box)), normalize))
            blurred.append(lap_var(to_gray(crop_roi(soft, box)), normalize))
    return np.array(sharp), np.array(blurred)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenes", type=int, default=12)
    ap.add_argument("--frames", type=int, default=60)
    ap.add_argument("--raw", action="store_true", help="unnormalized statistic")
    args = ap.parse_args()
    sharp, blurred = scores(args.scenes, args.frames, not args.raw)
    for name, v in (("sharp", sharp), ("blurred", blurred)):
        print(f"{name:8s} n={len(v)} min={v.min():.4f} median={np.median(v):.4f} max={v.max():.4f}")
    lo, hi = blurred.max(), sharp.min()
    if lo >= hi:
        print("distributions overlap; midpoint of medians:",
              f"{(np.median(sharp) + np.median(blurred)) / 2:.4f}")
    else:
        print(f"threshold = {(lo + hi) / 2:.4f}")


if __name__ == "__main__":
    main()
