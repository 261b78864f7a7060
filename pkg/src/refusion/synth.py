"""Deterministic synthetic sequences: one bordered sprite over a static noise
background, with scripted occlusion and motion-blur events."""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .config import ConfigError, format_kv, load_kv, parse_kv
from .evaluation import write_groundtruth
from .imaging import BBox, Frame, write_frame
from .ioutil import atomic_write_text

LINEAR = "LINEAR"
SINUSOID = "SINUSOID"
PIECEWISE = "PIECEWISE"
OCCLUDE = "OCCLUDE"
BLUR = "BLUR"

OCCLUDER_MARGIN = 4


@dataclass(frozen=True)
class Event:
    kind: str
    start: int
    duration: int

    def covers(self, t: int) -> bool:
        return self.start <= t < self.start + self.duration


@dataclass(frozen=True)
class SceneScript:
    frame_count: int = 100
    width: int = 320
    height: int = 240
    sprite_w: int = 24
    sprite_h: int = 24
    sprite_color: tuple = (200, 30, 30)
    class_id: int = 0
    background: int = 110
    noise_amp: int = 12
    occluder_color: tuple = (128, 128, 128)
    trajectory: str = LINEAR
    start: tuple = (60.0, 60.0)
    velocity: tuple = (3.0, 0.0)
    center: tuple = (160.0, 120.0)
    amplitude: tuple = (100.0, 60.0)
    period: tuple = (120.0, 90.0)
    waypoints: tuple = ()
    speed: float = 2.0
    blur_gain: float = 2.0
    events: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")
        if self.trajectory not in (LINEAR, SINUSOID, PIECEWISE):
            raise ValueError(f"unknown trajectory {self.trajectory!r}")
        if self.trajectory == PIECEWISE and len(self.waypoints) < 2:
            raise ValueError("PIECEWISE needs at least two waypoints")
        for ev in self.events:
            if ev.kind not in (OCCLUDE, BLUR):
                raise ValueError(f"unknown event kind {ev.kind!r}")
            if ev.start < 1 or ev.duration < 1 or ev.start + ev.duration - 1 > self.frame_count:
                raise ValueError(f"event {ev} outside [1, {self.frame_count}]")
        if self.sprite_w + 2 > self.width or self.sprite_h + 2 > self.height:
            raise ValueError("sprite does not fit in the frame")


def benchmark_script(seed: int = 7, frame_count: int = 300) -> SceneScript:
    """Loop around the frame border with one 20-frame occlusion and one
    10-frame blur burst; the path never revisits the occlusion site."""
    return SceneScript(
        frame_count=frame_count, trajectory=PIECEWISE,
        waypoints=((40, 40), (280, 40), (280, 200), (40, 200), (40, 60)),
        speed=2.4, events=(Event(OCCLUDE, 40, 20), Event(BLUR, 150, 10)), seed=seed)


# ---------------------------------------------------------------------------
# motion
# ---------------------------------------------------------------------------


def _reflect(p, lo, hi):
    span = hi - lo
    if span <= 0:
        return lo
    q = (p - lo) % (2 * span)
    return lo + (q if q <= span else 2 * span - q)


def trajectory_centers(script: SceneScript) -> np.ndarray:
    """Sprite centers for frames 1..frame_count, shape (frame_count, 2)."""
    t = np.arange(script.frame_count, dtype=np.float64)
    lo_x, hi_x = script.sprite_w / 2 + 1, script.width - script.sprite_w / 2 - 1
    lo_y, hi_y = script.sprite_h / 2 + 1, script.height - script.sprite_h / 2 - 1
    if script.trajectory == LINEAR:
        xs = [_reflect(script.start[0] + script.velocity[0] * k, lo_x, hi_x) for k in t]
        ys = [_reflect(script.start[1] + script.velocity[1] * k, lo_y, hi_y) for k in t]
        pts = np.column_stack([xs, ys])
    elif script.trajectory == SINUSOID:
        cx, cy = script.center
        ax, ay = script.amplitude
        px, py = script.period
        pts = np.column_stack([cx + ax * np.sin(2 * np.pi * t / px),
                               cy + ay * np.sin(2 * np.pi * t / py)])
    else:
        way = np.asarray(script.waypoints, dtype=np.float64)
        seg = np.diff(way, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        cum = np.concatenate([[0.0], np.cumsum(seg_len)])
        dist = np.minimum(t * script.speed, cum[-1])
        pts = np.column_stack([np.interp(dist, cum, way[:, 0]), np.interp(dist, cum, way[:, 1])])
    pts[:, 0] = np.clip(pts[:, 0], lo_x, hi_x)
    pts[:, 1] = np.clip(pts[:, 1], lo_y, hi_y)
    return pts


def sprite_boxes(script: SceneScript) -> list[BBox]:
    """Pixel-aligned sprite boxes (drawn position) for every frame."""
    boxes = []
    for cx, cy in trajectory_centers(script):
        x0 = int(math.floor(cx - script.sprite_w / 2 + 0.5))
        y0 = int(math.floor(cy - script.sprite_h / 2 + 0.5))
        boxes.append(BBox(x0, y0, script.sprite_w, script.sprite_h))
    return boxes


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


class SceneRenderer:
    def __init__(self, script: SceneScript):
        self.script = script
        self.boxes = sprite_boxes(script)
        self.centers = trajectory_centers(script)
        rng = np.random.default_rng(script.seed)
        noise = rng.integers(-script.noise_amp, script.noise_amp + 1,
                             size=(script.height, script.width, 3))
        self.background = np.clip(script.background + noise, 0, 255).astype(np.uint8)
        self._occluders = {}
        for ev in script.events:
            if ev.kind == OCCLUDE:
                span = self.boxes[ev.start - 1:ev.start - 1 + ev.duration]
                x0 = min(b.x for b in span) - OCCLUDER_MARGIN
                y0 = min(b.y for b in span) - OCCLUDER_MARGIN
                x1 = max(b.x + b.w for b in span) + OCCLUDER_MARGIN
                y1 = max(b.y + b.h for b in span) + OCCLUDER_MARGIN
                self._occluders[ev] = (int(x0), int(y0), int(x1), int(y1))

    def __len__(self):
        return self.script.frame_count

    def active(self, t: int, kind: str) -> Optional[Event]:
        for ev in self.script.events:
            if ev.kind == kind and ev.covers(t):
                return ev
        return None

    def truth(self, t: int) -> Optional[BBox]:
        return None if self.active(t, OCCLUDE) else self.boxes[t - 1]

    def velocity(self, t: int) -> tuple[float, float]:
        if self.script.frame_count == 1:
            return (0.0, 0.0)
        k = t - 1
        a, b = (k - 1, k) if k > 0 else (0, 1)
        d = self.centers[b] - self.centers[a]
        return float(d[0]), float(d[1])

    def render(self, t: int, events: bool = True) -> Frame:
        s = self.script
        img = self.background.copy()
        b = self.boxes[t - 1]
        x0, y0 = int(b.x), int(b.y)
        x1, y1 = x0 + s.sprite_w, y0 + s.sprite_h
        color = np.asarray(s.sprite_color, dtype=np.uint8)
        img[y0:y1, x0:x1] = color // 2
        img[y0 + 1:y1 - 1, x0 + 1:x1 - 1] = color
        if events:
            occ = self.active(t, OCCLUDE)
            if occ is not None:
                ox0, oy0, ox1, oy1 = self._occluders[occ]
                img[max(oy0, 0):oy1, max(ox0, 0):ox1] = np.asarray(s.occluder_color, dtype=np.uint8)
            if self.active(t, BLUR) is not None:
                img = directional_box_blur(img, self.velocity(t), self.blur_radius(t))
        return Frame(img, index=t)

    def blur_radius(self, t: int) -> int:
        vx, vy = self.velocity(t)
        return max(1, int(round(math.hypot(vx, vy) * self.script.blur_gain)))

    def __iter__(self) -> Iterator[Frame]:
        for t in range(1, self.script.frame_count + 1):
            yield self.render(t)


def directional_box_blur(img: np.ndarray, direction, radius: int) -> np.ndarray:
    """Average of ``2 * radius + 1`` copies shifted along ``direction``."""
    dx, dy = direction
    norm = math.hypot(dx, dy)
    ux, uy = (1.0, 0.0) if norm == 0 else (dx / norm, dy / norm)
    h, w = img.shape[:2]
    src = img.astype(np.float64)
    acc = np.zeros_like(src)
    rows = np.arange(h)
    cols = np.arange(w)
    for k in range(-radius, radius + 1):
        sx = int(round(k * ux))
        sy = int(round(k * uy))
        acc += src[np.clip(rows + sy, 0, h - 1)][:, np.clip(cols + sx, 0, w - 1)]
    out = acc / (2 * radius + 1)
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


@dataclass
class Summary:
    out_dir: Path
    frames: list = field(default_factory=list)
    groundtruth: list = field(default_factory=list)
    groundtruth_path: Optional[Path] = None
    detections_path: Optional[Path] = None


def detections_csv(renderer: SceneRenderer) -> str:
    s = renderer.script
    lines = []
    for t in range(1, s.frame_count + 1):
        b = renderer.truth(t)
        if b is not None:
            lines.append(f"{t},{s.class_id},1.0,{b.x:g},{b.y:g},{b.w:g},{b.h:g}")
    return "\n".join(lines) + "\n"


def generate(script: SceneScript, out_dir, fmt: str = "png") -> Summary:
    """Write frames, ``groundtruth.txt``, ``detections.csv`` and ``scene.txt``."""
    fmt = fmt.lower().lstrip(".")
    if fmt not in ("png", "ppm"):
        raise ValueError(f"unsupported frame format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    renderer = SceneRenderer(script)
    summary = Summary(out)
    for frame in renderer:
        path = out / f"{frame.index:06d}.{fmt}"
        write_frame(frame, path)
        summary.frames.append(path)
    summary.groundtruth = [renderer.truth(t) for t in range(1, script.frame_count + 1)]
    summary.groundtruth_path = out / "groundtruth.txt"
    write_groundtruth(summary.groundtruth_path, summary.groundtruth)
    summary.detections_path = out / "detections.csv"
    atomic_write_text(summary.detections_path, detections_csv(renderer))
    atomic_write_text(out / "scene.txt", format_script(script))
    return summary


# ---------------------------------------------------------------------------
# script files
# ---------------------------------------------------------------------------


def _pair(text, cast=float, sep=","):
    parts = [p for p in text.split(sep) if p.strip()]
    if len(parts) != 2:
        raise ConfigError(f"expected two values, got {text!r}")
    return tuple(cast(p) for p in parts)


def _ints(text, n):
    parts = [p for p in text.replace(" ", ",").split(",") if p]
    if len(parts) != n:
        raise ConfigError(f"expected {n} integers, got {text!r}")
    return tuple(int(p) for p in parts)


def script_from_dict(values: dict) -> SceneScript:
    kw = {}
    try:
        for key, raw in values.items():
            if key in ("frame_count", "class_id", "background", "noise_amp", "seed"):
                kw[key] = int(raw)
            elif key in ("speed", "blur_gain"):
                kw[key] = float(raw)
            elif key == "resolution":
                kw["width"], kw["height"] = _pair(raw.lower(), int, "x")
            elif key == "sprite_size":
                kw["sprite_w"], kw["sprite_h"] = _pair(raw.lower(), int, "x")
            elif key in ("sprite_color", "occluder_color"):
                kw[key] = _ints(raw, 3)
            elif key == "trajectory":
                kw[key] = raw.strip().upper()
            elif key in ("start", "velocity", "center", "amplitude", "period"):
                kw[key] = _pair(raw)
            elif key == "waypoints":
                kw[key] = tuple(_pair(p, float, ":") for p in raw.split())
            elif key == "events":
                evs = []
                for item in raw.replace(",", " ").split():
                    kind, start, dur = item.split(":")
                    evs.append(Event(kind.upper(), int(start), int(dur)))
                kw[key] = tuple(evs)
            else:
                raise ConfigError(f"unknown scene key {key!r}")
        return SceneScript(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_script(text: str) -> SceneScript:
    return script_from_dict(parse_kv(text))


def load_script(path) -> SceneScript:
    return script_from_dict(load_kv(path))


def format_script(s: SceneScript) -> str:
    vals = {
        "frame_count": s.frame_count,
        "resolution": f"{s.width}x{s.height}",
        "sprite_size": f"{s.sprite_w}x{s.sprite_h}",
        "sprite_color": ",".join(map(str, s.sprite_color)),
        "class_id": s.class_id,
        "background": s.background,
        "noise_amp": s.noise_amp,
        "occluder_color": ",".join(map(str, s.occluder_color)),
        "trajectory": s.trajectory,
        "start": f"{s.start[0]:.10g},{s.start[1]:.10g}",
        "velocity": f"{s.velocity[0]:.10g},{s.velocity[1]:.10g}",
        "center": f"{s.center[0]:.10g},{s.center[1]:.10g}",
        "amplitude": f"{s.amplitude[0]:.10g},{s.amplitude[1]:.10g}",
        "period": f"{s.period[0]:.10g},{s.period[1]:.10g}",
        "waypoints": " ".join(f"{x:.10g}:{y:.10g}" for x, y in s.waypoints),
        "speed": f"{s.speed:.10g}",
        "blur_gain": f"{s.blur_gain:.10g}",
        "events": " ".join(f"{e.kind}:{e.start}:{e.duration}" for e in s.events),
        "seed": s.seed,
    }
    if not s.waypoints:
        del vals["waypoints"]
    if not s.events:
        del vals["events"]
    return format_kv(vals)


def with_seed(script: SceneScript, seed: int) -> SceneScript:
    return replace(script, seed=seed)
