"""``refusion`` command line: track, eval, synth, bench.

Every ``track`` flag can also be set in a ``key = value`` config file
(``--config`` or ``$REFUSION_CONFIG``); flags win over the file, the file
wins over built-in defaults.

Exit codes: 0 ok, 2 bad arguments, 3 missing files, 4 backend failure at
init, 5 result/ground-truth length mismatch.
"""

import argparse
import json
import logging
import os
import sys
import time
from collections import Counter
from pathlib import Path

from . import __version__
from .blur import DEFAULT_BLUR_THRESH, BlurConfig
from .config import ConfigError, load_kv
from .errors import BackendError, InvalidBBox, LengthMismatch, MissingDetectionsFile
from .imaging import BBox, iter_sequence, list_frame_files
from .ioutil import atomic_write_text

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_BACKEND = 4
EXIT_LENGTH = 5

CONFIG_ENV = "REFUSION_CONFIG"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# settings: one table drives flags, config keys and defaults
# ---------------------------------------------------------------------------


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _rgb(text):
    parts = [int(p) for p in str(text).replace(" ", ",").split(",") if p]
    if len(parts) != 3 or not all(0 <= p <= 255 for p in parts):
        raise ValueError(f"expected r,g,b in 0..255, got {text!r}")
    return tuple(parts)


def _choice(*options):
    def conv(text):
        v = str(text).strip().lower()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return v
    return conv


def _bbox(text):
    return BBox.parse(str(text))


def _opt_int(text):
    v = str(text).strip().lower()
    return None if v in ("", "none", "any") else int(v)


TRACK_SETTINGS = {
    # name: (converter, default, help)
    "init_bbox": (_bbox, None, "initial box x,y,w,h (default: first groundtruth.txt row)"),
    "out": (str, None, "result CSV path (default: <sequence>/results.csv)"),
    "tracker": (_choice("ref", "extern"), "ref", "motion tracker backend"),
    "detector": (_choice("oracle", "blob", "extern"), "oracle", "object detector backend"),
    "extern_cmd": (str, None, "command for extern backends (line protocol on stdio)"),
    "extern_timeout": (float, 0.5, "per-request timeout for extern backends, seconds"),
    "detections": (str, None, "oracle detections CSV (default: <sequence>/detections.csv)"),
    "p_drop": (float, 0.0, "oracle detector dropout probability"),
    "jitter": (float, 0.0, "oracle detector jitter, px"),
    "blob_lo": (_rgb, (80, 0, 0), "blob detector lower RGB bound"),
    "blob_hi": (_rgb, (255, 60, 60), "blob detector upper RGB bound"),
    "search_radius": (int, 16, "reference tracker search radius, px"),
    "detector_interval": (int, 10, "run the detector every n-th frame"),
    "blur_thresh": (float, DEFAULT_BLUR_THRESH, "blur threshold on the sharpness statistic"),
    "blur_normalize": (_bool, True, "divide the sharpness sum by the ROI pixel count"),
    "epsilon": (float, 1.2, "re-identification acceptance threshold"),
    "template_count": (int, None, "templates kept for re-identification (default: from --fps)"),
    "fps": (float, 30.0, "sequence frame rate, used for the default template count"),
    "hist_bins": (int, 8, "histogram bins per color channel"),
    "patch_size": (int, 64, "side of the square comparison patch, px"),
    "assoc_iou_min": (float, 0.3, "minimum IoU to accept a detection as the target"),
    "target_class": (_opt_int, None, "detector class of the target (default: learned at init)"),
    "seed": (int, 0, "seed for every random choice"),
}


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_settings(parser, table):
    for name, (_, default, help_text) in table.items():
        suffix = "" if default is None else f" [default: {default}]"
        parser.add_argument(_flag(name), dest=name, default=None, metavar="VALUE",
                            help=help_text + suffix)
    parser.add_argument("--config", default=None,
                        help=f"key = value config file (fallback: ${CONFIG_ENV})")


def resolve_settings(args, table, env=None) -> dict:
    """Merge flag > config file > default, converting every value."""
    env = os.environ if env is None else env
    cfg_path = args.config or env.get(CONFIG_ENV)
    file_vals = {}
    if cfg_path:
        if not Path(cfg_path).is_file():
            raise CliError(EXIT_MISSING, f"config file not found: {cfg_path}")
        try:
            file_vals = load_kv(cfg_path)
        except ConfigError as exc:
            raise CliError(EXIT_USAGE, f"{cfg_path}: {exc}") from exc
        unknown = set(file_vals) - set(table)
        if unknown:
            raise CliError(EXIT_USAGE, f"{cfg_path}: unknown keys {sorted(unknown)}")
    out = {}
    for name, (conv, default, _) in table.items():
        raw = getattr(args, name, None)
        source = "flag"
        if raw is None and name in file_vals:
            raw, source = file_vals[name], "config"
        if raw is None:
            out[name] = default
            continue
        try:
            out[name] = conv(raw)
        except (ValueError, InvalidBBox) as exc:
            raise CliError(EXIT_USAGE, f"bad value for {_flag(name)} ({source}): {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# track
# ---------------------------------------------------------------------------


def fusion_config(s: dict):
    from .fusion import FusionConfig
    from .reid import ReidConfig, default_template_count

    k = s["template_count"] if s["template_count"] is not None else default_template_count(s["fps"])
    try:
        return FusionConfig(
            detector_interval=s["detector_interval"],
            target_class=s["target_class"],
            assoc_iou_min=s["assoc_iou_min"],
            blur=BlurConfig(s["blur_thresh"], s["blur_normalize"]),
            reid=ReidConfig(s["epsilon"], k, s["hist_bins"], s["patch_size"]),
        )
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc


def _build_backends(s: dict, seq_dir: Path):
    from .backends import (ColorBlobDetector, ExternalDetector, ExternalTracker, LineBridge,
                           NccTemplateTracker, OracleDetector)

    bridge = None
    if "extern" in (s["tracker"], s["detector"]):
        if not s["extern_cmd"]:
            raise CliError(EXIT_USAGE, "--extern-cmd is required for extern backends")
        try:
            bridge = LineBridge(s["extern_cmd"], timeout=s["extern_timeout"])
        except BackendError as exc:
            raise CliError(EXIT_BACKEND, str(exc)) from exc

    tracker = ExternalTracker(bridge) if s["tracker"] == "extern" else \
        NccTemplateTracker(s["search_radius"])
    if s["detector"] == "oracle":
        path = Path(s["detections"]) if s["detections"] else seq_dir / "detections.csv"
        try:
            detector = OracleDetector(path, s["p_drop"], s["jitter"], s["seed"])
        except MissingDetectionsFile as exc:
            raise CliError(EXIT_MISSING, str(exc)) from exc
    elif s["detector"] == "blob":
        detector = ColorBlobDetector(s["blob_lo"], s["blob_hi"],
                                     class_id=s["target_class"] or 0)
    else:
        detector = ExternalDetector(bridge)
    return tracker, detector, bridge


def cmd_track(args) -> int:
    from .evaluation import read_groundtruth
    from .fusion import iter_sequence_results, results_csv

    s = resolve_settings(args, TRACK_SETTINGS)
    seq_dir = Path(args.sequence)
    if not seq_dir.is_dir():
        raise CliError(EXIT_MISSING, f"sequence directory not found: {seq_dir}")
    if not list_frame_files(seq_dir):
        raise CliError(EXIT_MISSING, f"no numbered frames in {seq_dir}")
    init_box = s["init_bbox"]
    if init_box is None:
        gt = seq_dir / "groundtruth.txt"
        first = read_groundtruth(gt)[0] if gt.is_file() else None
        if first is None:
            raise CliError(EXIT_USAGE, "--init-bbox is required (no usable groundtruth.txt)")
        init_box = first
    cfg = fusion_config(s)
    tracker, detector, bridge = _build_backends(s, seq_dir)
    out = Path(s["out"]) if s["out"] else seq_dir / "results.csv"

    rows = []
    elapsed = 0.0
    try:
        it = iter_sequence_results(iter_sequence(seq_dir), init_box, cfg, tracker, detector)
        while True:
            t0 = time.perf_counter()
            try:
                row = next(it)
            except StopIteration:
                break
            elapsed += time.perf_counter() - t0
            rows.append(row)
    except InvalidBBox as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc
    except BackendError as exc:
        raise CliError(EXIT_BACKEND, f"backend failure during init: {exc}") from exc
    finally:
        if bridge is not None:
            bridge.close()

    atomic_write_text(out, results_csv(rows))
    counts = Counter(r.mode.value for r in rows)
    meta = {
        "sequence": str(seq_dir),
        "frames": len(rows),
        "seconds": elapsed,
        "fps": len(rows) / elapsed if elapsed > 0 else None,
        "modes": {m: counts.get(m, 0) for m in ("TRACKED", "DETECTED", "REIDENTIFIED", "LOST")},
        "tracker": s["tracker"],
        "detector": s["detector"],
        "seed": s["seed"],
    }
    atomic_write_text(meta_path(out), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    fps = f"{meta['fps']:.1f}" if meta["fps"] else "n/a"
    print(f"{out}: {len(rows)} frames, {fps} fps, modes {meta['modes']}")
    return EXIT_OK


def meta_path(results_path: Path) -> Path:
    return results_path.with_name(results_path.stem + ".meta.json")


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    from .evaluation import (compare_table, precision_curve, read_groundtruth, success_curve,
                             table_csv, table_text)
    from .fusion import read_results

    paths = [Path(p) for p in args.results]
    truth_path = Path(args.truth)
    for p in paths + [truth_path]:
        if not p.is_file():
            raise CliError(EXIT_MISSING, f"file not found: {p}")
    truth = read_groundtruth(truth_path)
    out_dir = Path(args.out_dir)
    names = []
    entries = []
    for p in paths:
        name = p.stem
        while name in names:
            name += "_"
        names.append(name)
        boxes = [r.bbox for r in read_results(p)]
        fps = None
        mp = meta_path(p)
        if mp.is_file():
            fps = json.loads(mp.read_text()).get("fps")
        entries.append((name, boxes, fps))
    try:
        for name, boxes, _ in entries:
            pc = precision_curve(boxes, truth)
            sc = success_curve(boxes, truth)
            atomic_write_text(out_dir / f"{name}.precision.csv", pc.to_csv())
            atomic_write_text(out_dir / f"{name}.success.csv", sc.to_csv())
            print(f"{name}: precision@20px {pc.representative:.4f}  "
                  f"success@0.5 {sc.representative:.4f}  auc {sc.auc:.4f}")
        rows = compare_table(entries, truth)
    except LengthMismatch as exc:
        raise CliError(EXIT_LENGTH, str(exc)) from exc
    atomic_write_text(out_dir / "table.csv", table_csv(rows))
    text = table_text(rows)
    atomic_write_text(out_dir / "table.txt", text)
    print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth / bench
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    from dataclasses import replace

    from .synth import benchmark_script, generate, load_script

    if args.frames is not None and args.frames < 1:
        raise CliError(EXIT_USAGE, "--frames must be >= 1")

    if args.script:
        if not Path(args.script).is_file():
            raise CliError(EXIT_MISSING, f"scene script not found: {args.script}")
        try:
            script = load_script(args.script)
        except ConfigError as exc:
            raise CliError(EXIT_USAGE, f"{args.script}: {exc}") from exc
    else:
        script = benchmark_script()
    changes = {}
    if args.frames is not None:
        changes["frame_count"] = args.frames
        # events that no longer fit are cut short or dropped
        changes["events"] = tuple(
            replace(ev, duration=min(ev.duration, args.frames - ev.start + 1))
            for ev in script.events if ev.start <= args.frames)
    if args.seed is not None:
        changes["seed"] = args.seed
    try:
        script = replace(script, **changes)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc
    summary = generate(script, args.out_dir, fmt=args.format)
    print(f"wrote {len(summary.frames)} frames, groundtruth and detections to {summary.out_dir}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import format_report, report_json, run_bench

    report = run_bench(frames=args.frames, seed=args.seed, compare_backends=args.compare_backends)
    if args.out:
        atomic_write_text(args.out, report_json(report))
    print(format_report(report), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="refusion", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="run the fusion tracker over a frame directory")
    p.add_argument("sequence", help="directory of numbered frames")
    _add_settings(p, TRACK_SETTINGS)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="precision/success curves and a comparison table")
    p.add_argument("results", nargs="+", help="result CSV files")
    p.add_argument("--truth", required=True, help="groundtruth.txt")
    p.add_argument("--out-dir", default="eval_out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic sequence")
    p.add_argument("out_dir")
    p.add_argument("--script", help="scene script (key = value); default: benchmark scene")
    p.add_argument("--frames", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("png", "ppm"), default="png")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="pipeline and kernel throughput")
    p.add_argument("--frames", type=int, default=500)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--compare-backends", action="store_true",
                   help="also time the numba and numpy kernels side by side")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"refusion: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
